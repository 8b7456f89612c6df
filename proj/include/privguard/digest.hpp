#ifndef PRIVGUARD_DIGEST_HPP
#define PRIVGUARD_DIGEST_HPP

#include <string>
#include <string_view>

namespace privguard {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace privguard

#endif  // PRIVGUARD_DIGEST_HPP
