#pragma once

#include <stdexcept>
#include <string>

namespace blockq {

// Queue parameters violate lambda * E[S] < b.
class unstable_error : public std::domain_error {
public:
    explicit unstable_error(const std::string &what) : std::domain_error(what) {}
};

// Root finding or the boundary linear system failed its accuracy checks.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string &what) : std::runtime_error(what) {}
};

// Input files that do not match the expected schema.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace blockq
