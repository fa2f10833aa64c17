#pragma once

#include "kcmc/errors.hpp"

namespace kcmc {

// All values are stated at M = 1 scale.
struct Tolerances {
    double root = 1e-12;   // relative
    double quad = 1e-9;    // absolute
    double ode = 1e-9;     // per-step relative
    double coord = 1e-8;
    double resid = 1e-6;

    void validate() const {
        if (!(root > 0 && quad > 0 && ode > 0 && coord > 0 && resid > 0)) {
            throw DomainError("tolerances must be strictly positive");
        }
        if (resid < ode) {
            throw DomainError("tolerances: resid must be >= ode");
        }
    }
};

}  // namespace kcmc
