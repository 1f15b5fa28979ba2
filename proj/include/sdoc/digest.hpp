#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace sdoc {

// SHA-256 as lowercase hex.
std::string sha256_hex(std::string_view data);

// Digest of an ordered field list. Fields are length-prefixed before
// hashing so that ("ab","c") and ("a","bc") cannot collide.
std::string digest_fields(const std::vector<std::string>& fields);
std::string digest_fields(std::initializer_list<std::string_view> fields);

}  // namespace sdoc
