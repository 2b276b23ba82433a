#pragma once

namespace hyperwalk {

// Constants attached to Conditions A (A, a) and B (B, b) and the derived
// paradox thresholds. Filled by derive_parameters.
struct ParadoxParameters {
    double A = 0.0;
    double a = 0.0;
    double B = 0.0;
    double b = 0.0;
    int r = 0;

    double epsilon0 = 0.0;
    int n = 0;
    double k_low = 0.0;
    double k_high = 0.0;
    double k = 0.0;

    // Lower bounds on M.
    double m_spacing = 0.0;     // (2r+1)(n-1)/k
    double m_radius = 0.0;      // 2r+1
    double m_condition_a = 0.0; // max(1, 2r(A+2)/(2k-A-1))
    double m_condition_b = 0.0; // 2r(B+2)(2kB+1)

    double m_required() const noexcept;
};

} // namespace hyperwalk
