#pragma once

#include <stdexcept>
#include <string>

namespace mdlab {

/// A precondition on an input was violated (bad argument, forbidden model case).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// An exact identity that must hold for a model failed to hold: the kernel and
/// the closed form disagree.
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

/// A configured size cap would be exceeded.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mdlab
