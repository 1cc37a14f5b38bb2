#pragma once

namespace ips {

// Entry point of the ipsim command-line tool. Exit codes: 0 success,
// 1 domain error, 2 usage error.
int cli_main(int argc, const char* const* argv);

}  // namespace ips
