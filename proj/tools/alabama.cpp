#include <alabama/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return alabama::cli::run(argc, argv, std::cout, std::cerr);
}
