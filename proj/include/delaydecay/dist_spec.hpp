#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "delaydecay/distributions.hpp"

namespace delaydecay {

// Failure to parse a textual distribution spec; offset() is the byte position
// in the input where the problem starts.
class spec_parse_error : public std::invalid_argument {
public:
    spec_parse_error(std::size_t offset, const std::string& what)
        : std::invalid_argument(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Parses "family:key=value,key=value" specs, e.g.
//   dirac:tau=0.3
//   gamma:k=2,lambda=5
//   uniform:a=0,b=0.6
//   truncnormal:m=0.2,sigma=0.1
//   atoms:s=0.1;w=0.5|s=0.4;w=0.5
// Syntax errors raise spec_parse_error with a byte offset; the parsed
// distribution is passed through validate(), so value constraints raise
// validation_error.
DelayDistribution parse_dist_spec(std::string_view text);

// Inverse of parse_dist_spec, with shortest round-trip number formatting.
std::string render_dist_spec(const DelayDistribution& dist);

} // namespace delaydecay
