#pragma once

#include <vector>

namespace nestedot {

/// A point mass of a finitely supported law on the line.
struct Atom {
    double value = 0.0;
    double mass = 0.0;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finitely supported probability law on the real line. Masses are strictly
/// positive and sum to one within 1e-9.
struct DiscreteDistribution {
    std::vector<Atom> atoms;

    /// Throws ValidationError on an empty support, nonpositive masses or a
    /// total mass off by more than 1e-9.
    void validate() const;
    std::size_t size() const { return atoms.size(); }
};

}  // namespace nestedot
