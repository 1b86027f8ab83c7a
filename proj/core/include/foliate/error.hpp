#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace foliate {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Point or parameter outside the domain where an evaluator is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

class CoverageError : public Error {
public:
    CoverageError(const std::string& what, int slab) : Error(what), slab_(slab) {}
    int slab() const { return slab_; }

private:
    int slab_;
};

class IoError : public Error {
public:
    IoError(const std::string& what, std::string path) : Error(what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Adaptive quadrature did not settle; carries the last estimate.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double best_re, double best_im)
        : Error(what), re_(best_re), im_(best_im) {}
    double best_real() const { return re_; }
    double best_imag() const { return im_; }

private:
    double re_, im_;
};

}  // namespace foliate
