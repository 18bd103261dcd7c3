// Error taxonomy shared by all siglab modules.
#pragma once

#include <stdexcept>
#include <string>

namespace siglab {

// Base class for all siglab-specific failures.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// A shape parameter lies outside its family's domain.
class parameter_domain_error : public error {
public:
    explicit parameter_domain_error(const std::string& what) : error(what) {}
};

// A requested moment target cannot be reached by the family, or the
// bisection bracket fails its monotonicity precheck.
class calibration_range_error : public error {
public:
    explicit calibration_range_error(const std::string& what) : error(what) {}
};

// A moment does not exist for the given parameters.
class diverged_moment_error : public error {
public:
    explicit diverged_moment_error(const std::string& what) : error(what) {}
};

// Sample cannot support the requested statistic (zero variance, all zeros, ...).
class degenerate_sample_error : public error {
public:
    explicit degenerate_sample_error(const std::string& what) : error(what) {}
};

// A score matrix is missing some (system, topic) cell; names the topic.
class ragged_input_error : public error {
public:
    explicit ragged_input_error(const std::string& what) : error(what) {}
};

// The same (system, topic) cell appears twice in the input.
class duplicate_key_error : public error {
public:
    explicit duplicate_key_error(const std::string& what) : error(what) {}
};

// Pairing needs at least two systems.
class insufficient_systems_error : public error {
public:
    explicit insufficient_systems_error(const std::string& what) : error(what) {}
};

// Input file or config is malformed; carries a line number when known.
class parse_error : public error {
public:
    parse_error(const std::string& what, long line = -1)
        : error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

}  // namespace siglab
