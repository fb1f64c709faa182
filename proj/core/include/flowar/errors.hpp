#pragma once

#include <stdexcept>
#include <string>

namespace flowar {

// Shape or divisibility mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Out-of-domain argument (negative scale factor, timestep outside [0,1], ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

// An attention score would overflow exp(); carries the offending score.
class ExpOverflowError : public std::range_error {
public:
    ExpOverflowError(double score, const std::string& where)
        : std::range_error("attention score " + std::to_string(score) +
                           " overflows exp() in " + where),
          score_(score) {}
    double score() const { return score_; }

private:
    double score_;
};

// No polynomial degree within the cap meets the requested tolerance.
class DegreeInfeasibleError : public std::runtime_error {
public:
    DegreeInfeasibleError(double score_bound, int cap, double delta)
        : std::runtime_error("no degree <= " + std::to_string(cap) +
                             " reaches tolerance " + std::to_string(delta) +
                             " for score bound B = " + std::to_string(score_bound)),
          score_bound_(score_bound),
          cap_(cap) {}
    double score_bound() const { return score_bound_; }
    int cap() const { return cap_; }

private:
    double score_bound_;
    int cap_;
};

// The polynomial score approximation produced a non-positive normalizer.
class ApproximationError : public std::runtime_error {
public:
    ApproximationError(int row, double row_sum)
        : std::runtime_error("approximate attention row " + std::to_string(row) +
                             " has non-positive normalizer " + std::to_string(row_sum) +
                             "; increase the polynomial degree"),
          row_(row),
          row_sum_(row_sum) {}
    int row() const { return row_; }
    double row_sum() const { return row_sum_; }

private:
    int row_;
    double row_sum_;
};

// Measured projection entries exceed the configured bound for the approximation.
class BoundViolationError : public std::invalid_argument {
public:
    BoundViolationError(double measured, double configured)
        : std::invalid_argument("projected Q/K entries reach " + std::to_string(measured) +
                                ", above the configured bound " + std::to_string(configured)),
          measured_(measured),
          configured_(configured) {}
    double measured() const { return measured_; }
    double configured() const { return configured_; }

private:
    double measured_;
    double configured_;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& cause)
        : std::runtime_error("I/O failure on '" + path + "': " + cause) {}
};

}  // namespace flowar
