#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace moran::cli {

// Exit codes: 0 ok, 1 an audit or check failed, 2 bad command line,
// 3 unexpected failure, 10 + ErrorKind for library errors.
inline constexpr int kAuditFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kInternal = 3;
inline constexpr int kErrorBase = 10;

int run(int argc, char** argv);
// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace moran::cli
