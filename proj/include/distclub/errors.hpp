#pragma once

#include <stdexcept>
#include <string>

namespace distclub
{
    // Invalid arguments, dimension mismatches, malformed configuration.
    class InputError : public std::runtime_error
    {
    public:
        explicit InputError(const std::string &msg) : std::runtime_error(msg) {}
    };

    // Dataset parsing and schema violations.
    class DataError : public std::runtime_error
    {
    public:
        explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
    };

    // Numeric failures (loss of positive definiteness, corrupted state).
    // Raised instead of returning silent garbage.
    class NumericError : public std::runtime_error
    {
    public:
        explicit NumericError(const std::string &msg) : std::runtime_error(msg) {}
    };
}
