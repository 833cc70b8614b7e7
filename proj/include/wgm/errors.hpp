#ifndef WGM_ERRORS_HPP
#define WGM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wgm
{

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Malformed configuration or input document. Carries the offending field path.
class ParseError : public Error
{
public:
    ParseError(const std::string &path, const std::string &what)
        : Error(path.empty() ? what : path + ": " + what), path_(path)
    {
    }
    const std::string &path() const { return path_; }

private:
    std::string path_;
};

// A well-formed document or object that violates a model invariant.
class ValidationError : public Error
{
public:
    using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error
{
public:
    using Error::Error;
};

// Unknown port names, mismatched grids and similar interface misuse.
class InterfaceError : public Error
{
public:
    using Error::Error;
};

// Unstable or singular linear systems, NaN residuals, oracle non-convergence.
class NumericalError : public Error
{
public:
    using Error::Error;
};

class FitError : public Error
{
public:
    FitError(const std::string &what, double last_residual)
        : Error(what), last_residual_(last_residual)
    {
    }
    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

class IoError : public Error
{
public:
    using Error::Error;
};

} // namespace wgm

#endif
