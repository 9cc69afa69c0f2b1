#pragma once

#include <cstdio>
#include <string>

namespace ksopt {

/// Shortest-safe round-trip text for CSV output ("%.17g").
inline std::string format_real(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace ksopt
