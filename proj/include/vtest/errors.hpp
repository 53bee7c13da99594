#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vtest {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Exact null law requested for sizes where m is not a multiple of n.
class UnsupportedSampleRatio : public Error {
public:
    UnsupportedSampleRatio(long n, long m)
        : Error("exact null distribution needs m to be a multiple of n (n=" + std::to_string(n) +
                ", m=" + std::to_string(m) + ")"),
          n_(n), m_(m) {}
    long n() const { return n_; }
    long m() const { return m_; }

private:
    long n_;
    long m_;
};

/// Values shared between the two samples under the error tie policy.
class TieError : public Error {
public:
    explicit TieError(std::vector<double> values)
        : Error(make_message(values)), values_(std::move(values)) {}
    const std::vector<double>& values() const { return values_; }

private:
    static std::string make_message(const std::vector<double>& v) {
        std::string s = "cross-sample ties at " + std::to_string(v.size()) + " value(s):";
        for (std::size_t i = 0; i < v.size() && i < 5; ++i) s += " " + std::to_string(v[i]);
        if (v.size() > 5) s += " ...";
        return s;
    }
    std::vector<double> values_;
};

/// Series did not reach the requested tolerance within the index cap.
class TruncationError : public Error {
public:
    TruncationError(double x, double bound)
        : Error("series for x=" + std::to_string(x) + " stopped with tail bound " +
                std::to_string(bound)),
          bound_(bound) {}
    double achieved_bound() const { return bound_; }

private:
    double bound_;
};

}  // namespace vtest
