// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/cli.hpp"

#include <iostream>

int main(int argc, char **argv)
{
    return thz::cli::run(argc, argv, std::cout, std::cerr);
}
