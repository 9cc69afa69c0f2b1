#include <iostream>

#include "ksopt/cli.hpp"

int main(int argc, char** argv)
{
    return ksopt::run(argc, argv, std::cout, std::cerr);
}
