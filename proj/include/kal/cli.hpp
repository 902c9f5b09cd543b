// SPDX-License-Identifier: MIT
#pragma once

#include <ostream>

namespace kal {

// Subcommands: catalog list | verify | angles | flow.
// Exit codes: 0 no failures, 1 some check failed, 2 configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kal
