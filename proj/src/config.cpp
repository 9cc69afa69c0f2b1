#include "ksopt/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "ksopt/snapshot.hpp"

namespace ksopt {

ConfigError::ConfigError(Kind kind, std::string key, const std::string& message)
    : Error(key.empty() ? message : key + ": " + message), kind_(kind), key_(std::move(key))
{
}

double FieldExpr::evaluate(double x, double y, double lx, double ly) const
{
    using std::numbers::pi;
    switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::constant: return args.at(0);
    case Kind::cosine:
        return args.at(0) + args.at(1) * std::cos(args.at(2) * pi * x / lx) * std::cos(args.at(3) * pi * y / ly);
    case Kind::gaussian: {
        const double dx = x - args.at(1);
        const double dy = y - args.at(2);
        const double s = args.at(3);
        const double offset = args.size() > 4 ? args[4] : 0.0;
        return offset + args.at(0) * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
    }
    case Kind::file:
    case Kind::manufactured: break;
    }
    throw PreconditionError("expression " + describe() + " has no pointwise value");
}

std::string FieldExpr::describe() const
{
    auto list = [this] {
        std::ostringstream s;
        s.precision(17);
        for (std::size_t k = 0; k < args.size(); ++k) s << (k ? ", " : "") << args[k];
        return s.str();
    };
    switch (kind) {
    case Kind::zero: return "zero";
    case Kind::constant: return "constant(" + list() + ")";
    case Kind::cosine: return "cosine(" + list() + ")";
    case Kind::gaussian: return "gaussian(" + list() + ")";
    case Kind::file: return "file:" + path.string();
    case Kind::manufactured: return "manufactured";
    }
    return "?";
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

ConfigError type_error(const std::string& key, const std::string& value, const char* expected)
{
    return ConfigError(ConfigError::Kind::type_mismatch, key, "expected " + std::string(expected) + ", got '" + value + "'");
}

ConfigError invariant(const std::string& key, const std::string& message)
{
    return ConfigError(ConfigError::Kind::invariant, key, message);
}

double to_real(const std::string& key, const std::string& value)
{
    double x = 0.0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x)) throw type_error(key, value, "a finite real number");
    return x;
}

int to_int(const std::string& key, const std::string& value)
{
    int x = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, x);
    if (ec != std::errc() || ptr != end) throw type_error(key, value, "an integer");
    return x;
}

std::vector<double> to_list(const std::string& key, const std::string& value)
{
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real(key, trim(item)));
    return out;
}

FieldExpr to_expr(const std::string& key, const std::string& value, bool allow_zero, bool allow_manufactured)
{
    FieldExpr e;
    if (value.rfind("file:", 0) == 0) {
        e.kind = FieldExpr::Kind::file;
        e.args.clear();
        e.path = trim(value.substr(5));
        if (e.path.empty()) throw type_error(key, value, "file:<path>");
        return e;
    }
    if (value == "zero" && allow_zero) return FieldExpr{FieldExpr::Kind::zero, {}, {}};
    if (value == "manufactured" && allow_manufactured) return FieldExpr{FieldExpr::Kind::manufactured, {}, {}};

    const auto open = value.find('(');
    if (open == std::string::npos || value.back() != ')') {
        throw type_error(key, value, "an expression id (constant, cosine, gaussian, file:)");
    }
    const std::string name = trim(value.substr(0, open));
    e.args = to_list(key, value.substr(open + 1, value.size() - open - 2));
    std::size_t lo = 0;
    std::size_t hi = 0;
    if (name == "constant") {
        e.kind = FieldExpr::Kind::constant;
        lo = hi = 1;
    } else if (name == "cosine") {
        e.kind = FieldExpr::Kind::cosine;
        lo = hi = 4;
    } else if (name == "gaussian") {
        e.kind = FieldExpr::Kind::gaussian;
        lo = 4;
        hi = 5;
    } else {
        throw type_error(key, value, "an expression id (constant, cosine, gaussian, file:)");
    }
    if (e.args.size() < lo || e.args.size() > hi) {
        throw type_error(key, value, (name + " with " + std::to_string(lo) +
                                      (lo == hi ? "" : "-" + std::to_string(hi)) + " arguments").c_str());
    }
    if (e.kind == FieldExpr::Kind::gaussian && !(e.args[3] > 0.0)) throw invariant(key, "gaussian width must be positive");
    return e;
}

FluxScheme to_scheme(const std::string& key, const std::string& value)
{
    if (value == "central") return FluxScheme::central;
    if (value == "upwind") return FluxScheme::upwind;
    throw type_error(key, value, "central or upwind");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"domain.Lx", [](RunConfig& c, auto& k, auto& v) { c.lx = to_real(k, v); }},
        {"domain.Ly", [](RunConfig& c, auto& k, auto& v) { c.ly = to_real(k, v); }},
        {"grid.nx", [](RunConfig& c, auto& k, auto& v) { c.nx = to_int(k, v); }},
        {"grid.ny", [](RunConfig& c, auto& k, auto& v) { c.ny = to_int(k, v); }},
        {"time.T", [](RunConfig& c, auto& k, auto& v) { c.final_time = to_real(k, v); }},
        {"time.nt", [](RunConfig& c, auto& k, auto& v) { c.steps = to_int(k, v); }},
        {"model.kappa", [](RunConfig& c, auto& k, auto& v) { c.model.kappa = to_real(k, v); }},
        {"model.r", [](RunConfig& c, auto& k, auto& v) { c.model.r = to_real(k, v); }},
        {"model.mu", [](RunConfig& c, auto& k, auto& v) { c.model.mu = to_real(k, v); }},
        {"model.p_exponent", [](RunConfig& c, auto& k, auto& v) { c.model.p_exponent = to_real(k, v); }},
        {"control.region",
         [](RunConfig& c, auto& k, auto& v) {
             auto r = to_list(k, v);
             if (r.size() != 4) throw type_error(k, v, "four numbers x0, y0, x1, y1");
             c.region = std::move(r);
         }},
        {"control.kind",
         [](RunConfig& c, auto& k, auto& v) {
             if (v == "unconstrained") {
                 c.set.kind = AdmissibleSet::Kind::unconstrained;
             } else if (v == "box") {
                 c.set.kind = AdmissibleSet::Kind::box;
             } else {
                 throw type_error(k, v, "unconstrained or box");
             }
         }},
        {"control.f_min", [](RunConfig& c, auto& k, auto& v) { c.set.f_min = to_real(k, v); }},
        {"control.f_max", [](RunConfig& c, auto& k, auto& v) { c.set.f_max = to_real(k, v); }},
        {"control.initial", [](RunConfig& c, auto& k, auto& v) { c.control_initial = to_expr(k, v, true, false); }},
        {"cost.gamma_u", [](RunConfig& c, auto& k, auto& v) { c.weights.gamma_u = to_real(k, v); }},
        {"cost.gamma_v", [](RunConfig& c, auto& k, auto& v) { c.weights.gamma_v = to_real(k, v); }},
        {"cost.gamma_f", [](RunConfig& c, auto& k, auto& v) { c.weights.gamma_f = to_real(k, v); }},
        {"targets.u_d", [](RunConfig& c, auto& k, auto& v) { c.u_d = to_expr(k, v, false, true); }},
        {"targets.v_d", [](RunConfig& c, auto& k, auto& v) { c.v_d = to_expr(k, v, false, true); }},
        {"targets.f_star", [](RunConfig& c, auto& k, auto& v) { c.f_star = to_expr(k, v, false, false); }},
        {"init.u0", [](RunConfig& c, auto& k, auto& v) { c.u0 = to_expr(k, v, false, false); }},
        {"init.v0", [](RunConfig& c, auto& k, auto& v) { c.v0 = to_expr(k, v, false, false); }},
        {"forward.scheme", [](RunConfig& c, auto& k, auto& v) { c.forward.scheme = to_scheme(k, v); }},
        {"forward.picard_tol", [](RunConfig& c, auto& k, auto& v) { c.forward.picard.tol = to_real(k, v); }},
        {"forward.picard_max_iters",
         [](RunConfig& c, auto& k, auto& v) { c.forward.picard.max_iters = to_int(k, v); }},
        {"forward.cg_tol", [](RunConfig& c, auto& k, auto& v) { c.forward.cg.rel_tol = to_real(k, v); }},
        {"adjoint.tol", [](RunConfig& c, auto& k, auto& v) { c.adjoint.tol = to_real(k, v); }},
        {"adjoint.max_iters", [](RunConfig& c, auto& k, auto& v) { c.adjoint.max_iters = to_int(k, v); }},
        {"adjoint.cg_tol", [](RunConfig& c, auto& k, auto& v) { c.adjoint.cg.rel_tol = to_real(k, v); }},
        {"optimizer.max_iters", [](RunConfig& c, auto& k, auto& v) { c.optimizer.max_iters = to_int(k, v); }},
        {"optimizer.vi_tol", [](RunConfig& c, auto& k, auto& v) { c.optimizer.vi_tol = to_real(k, v); }},
        {"optimizer.armijo_c1", [](RunConfig& c, auto& k, auto& v) { c.optimizer.armijo.c1 = to_real(k, v); }},
        {"optimizer.armijo_shrink",
         [](RunConfig& c, auto& k, auto& v) { c.optimizer.armijo.shrink = to_real(k, v); }},
        {"optimizer.armijo_s0", [](RunConfig& c, auto& k, auto& v) { c.optimizer.armijo.s0 = to_real(k, v); }},
        {"optimizer.armijo_max_backtracks",
         [](RunConfig& c, auto& k, auto& v) { c.optimizer.armijo.max_backtracks = to_int(k, v); }},
        {"optimizer.starts", [](RunConfig& c, auto& k, auto& v) { c.starts = to_int(k, v); }},
        {"gradcheck.directions", [](RunConfig& c, auto& k, auto& v) { c.gradcheck_directions = to_int(k, v); }},
        {"gradcheck.eps", [](RunConfig& c, auto& k, auto& v) { c.gradcheck_eps = to_real(k, v); }},
        {"mms.levels", [](RunConfig& c, auto& k, auto& v) { c.mms_levels = to_int(k, v); }},
        {"output.directory", [](RunConfig& c, auto&, auto& v) { c.output_directory = v; }},
        {"output.snapshot_every", [](RunConfig& c, auto& k, auto& v) { c.snapshot_every = to_int(k, v); }},
    };
    return table;
}

void require_positive(const std::string& key, double x)
{
    if (!(x > 0.0)) throw invariant(key, "must be positive");
}

void check_nonnegative_expr(const std::string& key, const FieldExpr& e, const RunConfig& c)
{
    if (e.kind == FieldExpr::Kind::file) return; // checked when loaded
    const GridSpec g = c.grid();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (e.evaluate(g.x_center(i), g.y_center(j), g.lx, g.ly) < 0.0) {
                throw invariant(key, "initial data must be nonnegative, " + e.describe() + " is negative at (" +
                                         std::to_string(g.x_center(i)) + ", " + std::to_string(g.y_center(j)) + ")");
            }
        }
    }
}

void validate(const RunConfig& c)
{
    require_positive("domain.Lx", c.lx);
    require_positive("domain.Ly", c.ly);
    if (c.nx < 2) throw invariant("grid.nx", "must be >= 2");
    if (c.ny < 2) throw invariant("grid.ny", "must be >= 2");
    require_positive("time.T", c.final_time);
    if (c.steps < 1) throw invariant("time.nt", "must be >= 1");

    if (c.model.r < 0.0) throw invariant("model.r", "must be nonnegative");
    require_positive("model.mu", c.model.mu);
    if (!(c.model.p_exponent > 2.0 && c.model.p_exponent < 3.0)) throw invariant("model.p_exponent", "must lie in (2, 3)");

    if (c.set.bounded() && !(c.set.f_min <= c.set.f_max)) throw invariant("control.f_max", "must be >= control.f_min");
    if (c.region) {
        const auto& r = *c.region;
        if (!(r[0] < r[2] && r[1] < r[3])) throw invariant("control.region", "needs x0 < x1 and y0 < y1");
        if (make_region(c).count() == 0) throw invariant("control.region", "contains no cell centers");
    }

    if (c.weights.gamma_u < 0.0) throw invariant("cost.gamma_u", "must be nonnegative");
    if (c.weights.gamma_v < 0.0) throw invariant("cost.gamma_v", "must be nonnegative");
    if (c.weights.gamma_f < 0.0) throw invariant("cost.gamma_f", "must be nonnegative");
    if (c.weights.gamma_f == 0.0 && !c.set.bounded()) {
        throw invariant("cost.gamma_f", "gamma_f = 0 requires control.kind = box: a minimizer is only guaranteed "
                                        "when gamma_f > 0 or the admissible set is bounded");
    }

    if ((c.u_d.kind == FieldExpr::Kind::manufactured) != (c.v_d.kind == FieldExpr::Kind::manufactured)) {
        throw invariant("targets.v_d", "targets.u_d and targets.v_d must both be manufactured or neither");
    }
    check_nonnegative_expr("init.u0", c.u0, c);
    check_nonnegative_expr("init.v0", c.v0, c);

    if (c.forward.picard.max_iters < 1) throw invariant("forward.picard_max_iters", "must be >= 1");
    require_positive("forward.picard_tol", c.forward.picard.tol);
    require_positive("forward.cg_tol", c.forward.cg.rel_tol);
    if (c.adjoint.max_iters < 1) throw invariant("adjoint.max_iters", "must be >= 1");
    require_positive("adjoint.tol", c.adjoint.tol);
    require_positive("adjoint.cg_tol", c.adjoint.cg.rel_tol);

    if (c.optimizer.max_iters < 0) throw invariant("optimizer.max_iters", "must be >= 0");
    require_positive("optimizer.vi_tol", c.optimizer.vi_tol);
    const auto& a = c.optimizer.armijo;
    if (!(a.c1 > 0.0 && a.c1 < 1.0)) throw invariant("optimizer.armijo_c1", "must lie in (0, 1)");
    if (!(a.shrink > 0.0 && a.shrink < 1.0)) throw invariant("optimizer.armijo_shrink", "must lie in (0, 1)");
    require_positive("optimizer.armijo_s0", a.s0);
    if (a.max_backtracks < 0) throw invariant("optimizer.armijo_max_backtracks", "must be >= 0");
    if (c.starts < 1) throw invariant("optimizer.starts", "must be >= 1");

    if (c.gradcheck_directions < 1) throw invariant("gradcheck.directions", "must be >= 1");
    require_positive("gradcheck.eps", c.gradcheck_eps);
    if (c.mms_levels < 3) throw invariant("mms.levels", "must be >= 3");
    if (c.snapshot_every < 1) throw invariant("output.snapshot_every", "must be >= 1");
}

} // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_directory)
{
    RunConfig c;
    c.base_directory = base_directory;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(ConfigError::Kind::syntax, "", "line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(ConfigError::Kind::unknown_key, key, "unknown key");
        if (value.empty()) throw type_error(key, value, "a value");
        it->second(c, key, value);
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(ConfigError::Kind::syntax, "", "cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path().empty() ? "." : path.parent_path());
}

Field2D make_field(const FieldExpr& expr, const GridSpec& grid, const std::filesystem::path& base)
{
    if (expr.kind == FieldExpr::Kind::file) {
        const auto p = expr.path.is_absolute() ? expr.path : base / expr.path;
        return read_snapshot(p, grid);
    }
    return Field2D::from_function(grid, [&](double x, double y) { return expr.evaluate(x, y, grid.lx, grid.ly); });
}

RegionMask make_region(const RunConfig& config)
{
    const GridSpec g = config.grid();
    if (!config.region) return RegionMask::whole(g);
    const auto& r = *config.region;
    return RegionMask::rectangle(g, r[0], r[1], r[2], r[3]);
}

ControlField control_from_expr(const FieldExpr& expr, const Problem& problem, const std::filesystem::path& base)
{
    const Field2D values = make_field(expr, problem.u0.grid(), base);
    ControlField f(problem.time_grid, problem.region);
    for (int n = 0; n < problem.time_grid.steps; ++n) {
        for (std::size_t k = 0; k < problem.region.count(); ++k) f.at(n, k) = values[problem.region.cells()[k]];
    }
    return f;
}

Problem build_problem(const RunConfig& c)
{
    const GridSpec g = c.grid();
    Problem p;
    p.u0 = make_field(c.u0, g, c.base_directory);
    p.v0 = make_field(c.v0, g, c.base_directory);
    p.params = c.model;
    p.weights = c.weights;
    p.set = c.set;
    p.time_grid = c.time_grid();
    p.region = make_region(c);
    p.forward = c.forward;
    p.adjoint = c.adjoint;

    if (c.u_d.kind == FieldExpr::Kind::manufactured) {
        const ControlField f_star = control_from_expr(c.f_star, p, c.base_directory);
        StateTrajectory target = solve_forward(p.u0, p.v0, f_star, p.params, p.forward);
        p.targets = Targets::trajectory(std::move(target.u), std::move(target.v));
    } else {
        p.targets = Targets::constant(make_field(c.u_d, g, c.base_directory), make_field(c.v_d, g, c.base_directory));
    }
    p.validate();
    return p;
}

ControlField initial_control(const RunConfig& c, const Problem& problem)
{
    switch (c.control_initial.kind) {
    case FieldExpr::Kind::zero: return problem.zero_control();
    case FieldExpr::Kind::file: {
        const auto& path = c.control_initial.path;
        return read_control(path.is_absolute() ? path : c.base_directory / path, problem.time_grid, problem.region);
    }
    default: return control_from_expr(c.control_initial, problem, c.base_directory);
    }
}

} // namespace ksopt
