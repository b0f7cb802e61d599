#include <iostream>

#include "epj/cli.hpp"

int main(int argc, char** argv)
{
    return epj::cli::run(argc, argv, std::cout, std::cerr);
}
