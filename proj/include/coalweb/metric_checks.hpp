#pragma once

#include <cstddef>
#include <cstdint>

namespace coalweb {

// Random-triple audit of the three metric layers: rho on compactified
// points, the path distance, and the Hausdorff distance on path families.
// Point checks are exact arithmetic (tolerance 1e-12); path and family
// checks allow 1e-9 plus the reported refinement errors, since the distance
// is a lower bound of the true sup.
struct MetricTripleReport {
    std::size_t n_triples = 0;
    std::size_t rho_violations = 0;
    std::size_t path_violations = 0;
    std::size_t family_violations = 0;
    std::size_t cap_identity_failures = 0;  // rho((x,+inf),(x',+inf)) must be exactly 0
    double max_refine_error = 0.0;

    std::size_t total_violations() const {
        return rho_violations + path_violations + family_violations + cap_identity_failures;
    }
};

MetricTripleReport run_metric_triples(std::size_t n_triples, std::uint64_t seed,
                                      double psi_step = 1e-3);

}  // namespace coalweb
