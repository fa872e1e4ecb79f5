// SPDX-License-Identifier: Apache-2.0

#include "mecrl/cli.hpp"

int main(int argc, char** argv) { return mecrl::cli_main(argc, argv); }
