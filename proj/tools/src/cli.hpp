#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tgrowth {

/// Exit codes: 0 all checks passed, 1 a check failed or the run aborted,
/// 2 usage or config error, 3 I/O error.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tgrowth
