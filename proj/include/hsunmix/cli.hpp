#pragma once

namespace hsunmix {

/// Full command-line front end. Returns the process exit code:
/// 0 success, 1 runtime/experiment failure, 2 usage or config error.
int cli_main(int argc, const char* const* argv);

}  // namespace hsunmix
