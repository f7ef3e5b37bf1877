#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pathheat {

// Exit codes: 0 success, 1 a checked criterion failed, 2 bad configuration.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace pathheat
