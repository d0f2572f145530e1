#pragma once

#include <stdexcept>
#include <string>

namespace biphoton {

// Base for every error raised by the library. Messages are meant to be shown
// to the user as-is.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class PackingFailure : public Error {
public:
    PackingFailure(std::size_t particle_index, std::size_t n_particles)
        : Error("packing failure: could not place particle " + std::to_string(particle_index) +
                " of " + std::to_string(n_particles) + " within the retry budget"),
          particle_index_(particle_index) {}

    std::size_t particle_index() const { return particle_index_; }

private:
    std::size_t particle_index_;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class DarkChannel : public Error {
public:
    using Error::Error;
};

} // namespace biphoton
