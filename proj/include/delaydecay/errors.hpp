#pragma once

#include <stdexcept>
#include <string>

namespace delaydecay {

// Machine-checkable reason attached to every exception thrown by this library.
enum class errc {
    non_finite_parameter,
    nonpositive_shape,
    nonpositive_rate,
    nonpositive_sigma,
    empty_interval,
    negative_support,
    no_atoms,
    nonpositive_weight,
    weight_sum_off,
    no_density,
    mu_out_of_range,
    eps_out_of_range,
    conditions_not_met,
    bad_config,
    bad_bracket,
    non_monotone_predicate,
    nonpositive_window,
};

// Rejected distribution or configuration parameters.
class validation_error : public std::invalid_argument {
public:
    validation_error(errc code, const std::string& what)
        : std::invalid_argument(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

// Operation invoked outside its admissible input range.
class domain_error : public std::domain_error {
public:
    domain_error(errc code, const std::string& what)
        : std::domain_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

// Bracketing or search failure in a root/feasibility scan.
class bracket_error : public std::runtime_error {
public:
    bracket_error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace delaydecay
