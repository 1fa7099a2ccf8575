#pragma once

#include <stdexcept>
#include <string>

namespace phasecell {

enum class ErrorKind {
    precondition,  ///< invalid argument or violated domain contract
    format,        ///< unparseable or corrupt serialized data
    io,            ///< file system failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(ErrorKind::precondition, msg);
}

}  // namespace phasecell
