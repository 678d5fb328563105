#pragma once

#include <string>
#include <variant>
#include <vector>

namespace delaydecay {

// Delay measures on [0, inf). All families are probability distributions;
// validate() is the single entry point that enforces parameter constraints.

struct Dirac {
    double tau = 0.0;
};

struct Gamma {
    double k = 1.0;
    double lambda = 1.0;
};

struct Uniform {
    double a = 0.0;
    double b = 1.0;
};

struct TruncatedNormal {
    double m = 0.0;
    double sigma = 1.0;
};

struct Atom {
    double s = 0.0;
    double w = 1.0;
};

struct FiniteAtoms {
    std::vector<Atom> atoms;
};

using DelayDistribution =
    std::variant<Dirac, Gamma, Uniform, TruncatedNormal, FiniteAtoms>;

// Checks parameter ranges and returns a normalized copy: atom lists come back
// sorted by position, duplicates merged, weights rescaled to sum exactly 1.
// Throws validation_error on any violation.
DelayDistribution validate(const DelayDistribution& dist);

// E[exp(mu * S)] for mu >= 0; +inf where the moment diverges (Gamma with
// mu >= lambda). exp_moment(d, 0) == 1 exactly. Throws domain_error for
// mu < 0 or non-finite mu.
double exp_moment(const DelayDistribution& dist, double mu);

// E[S].
double mean_delay(const DelayDistribution& dist);

// P(S <= s); 0 for s < 0.
double cdf(const DelayDistribution& dist, double s);

// Density with respect to Lebesgue measure. Throws domain_error for purely
// atomic distributions (Dirac, FiniteAtoms).
double density(const DelayDistribution& dist, double s);

// Smallest S >= 0 with 1 - cdf(S) <= eps; for compactly supported families
// this is the supremum of the support. Requires eps in (0, 1).
double tail_cutoff(const DelayDistribution& dist, double eps);

// True for families with a Lebesgue density (Gamma, Uniform, TruncatedNormal).
bool has_density(const DelayDistribution& dist);

// Infimum of the support.
double support_lower(const DelayDistribution& dist);

// Atom decomposition of a purely atomic distribution; Dirac yields a single
// unit atom. Throws domain_error for families with a density.
std::vector<Atom> atom_list(const DelayDistribution& dist);

// Lowercase family tag: dirac, gamma, uniform, truncnormal, atoms.
std::string family_name(const DelayDistribution& dist);

} // namespace delaydecay
