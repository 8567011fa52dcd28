#ifndef TERMFORGE_CLI_APP_H_
#define TERMFORGE_CLI_APP_H_

#include <ostream>
#include <string>
#include <vector>

namespace termforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. Results go to `out` unless --out names a
// file; diagnostics and usage text go to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace termforge::cli

#endif  // TERMFORGE_CLI_APP_H_
