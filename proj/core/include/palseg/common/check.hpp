#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace palseg {

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline void format_into(std::ostringstream&) {}

template <typename T, typename... Rest>
void format_into(std::ostringstream& os, const T& head, const Rest&... rest) {
    os << head;
    format_into(os, rest...);
}

template <typename... Args>
[[noreturn]] void raise(const char* file, int line, const Args&... args) {
    std::ostringstream os;
    format_into(os, args...);
    os << " (" << file << ":" << line << ")";
    throw Error(os.str());
}

} // namespace detail

} // namespace palseg

#define PALSEG_CHECK(cond, ...)                                          \
    do {                                                                 \
        if (!(cond)) {                                                   \
            ::palseg::detail::raise(__FILE__, __LINE__, __VA_ARGS__);    \
        }                                                                \
    } while (0)

#define PALSEG_FAIL(...) ::palseg::detail::raise(__FILE__, __LINE__, __VA_ARGS__)
