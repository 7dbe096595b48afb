// oracle_debug.hpp - test-only backdoor into the hidden state of an oracle.
// Sealed out of the learner-facing interface: learner code must not include
// this header. Tests use it to assert invariants against the hidden
// polynomial.
#pragma once

#include "phaselearn/oracle.hpp"

namespace phaselearn {

struct OracleInspector {
    static const F2Poly& binary_poly(const PhaseOracle& o) { return o.require_binary("inspect"); }
    static const ZqPoly& zq_poly(const PhaseOracle& o) { return o.require_generalized("inspect"); }
    static const ZqPoly& stabilizer_poly(const PhaseOracle& o) {
        return o.require_stabilizer("inspect").f;
    }
    static const StabSupport& stabilizer_support(const PhaseOracle& o) {
        return o.require_stabilizer("inspect").support;
    }
    // Pre-noise (z, w) of the most recent Bell sample.
    static BellSample last_clean_bell(const PhaseOracle& o) { return o.last_clean_; }
};

}  // namespace phaselearn
