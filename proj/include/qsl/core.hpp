#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace qsl {

using cplx = std::complex<double>;

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename Scalar>
inline Scalar from_complex(cplx z);
template <>
inline double from_complex<double>(cplx z) { return z.real(); }
template <>
inline cplx from_complex<cplx>(cplx z) { return z; }

inline constexpr double pi = 3.14159265358979323846;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Quadrature or propagation did not reach the requested tolerance.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, double x) : Error(what), x_(x) {}
    double where() const { return x_; }

private:
    double x_;
};

class SearchError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

class NearSpectrumError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

} // namespace qsl
