#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "flateta/spectral.hpp"

namespace flateta {

// parse "a+bi" style complex literals ("0.3+0.25i", "-i", "2", "1e-3-2.5i")
cplx parse_complex(std::string_view text);

enum class MetricKind { identity, constant, harmonic };

struct HarmonicTerm {
    double amplitude = 0.0;
    bool use_sin = false;
    int axis = 0;  // zero-based
    int mode = 1;
};

// metric description: constant G0, or exp(-phi K) exp(q H) exp(phi K) with
// trigonometric polynomials q and phi
struct MetricDesc {
    MetricKind kind = MetricKind::identity;
    Matrix matrix;               // G0 (constant) or H (harmonic)
    Matrix rotation;             // K, optional anti-Hermitian generator
    bool has_rotation = false;
    std::vector<HarmonicTerm> terms;      // q
    std::vector<HarmonicTerm> rot_terms;  // phi
};

struct ExperimentSpec {
    std::string experiment;
    int dim = 1;
    int resolution = 0;  // 0 = per-dim default
    int rank = 1;
    std::vector<Matrix> w;  // one per axis
    MetricDesc metric;
    int e_rank = 1;
    SpinStructure spin = SpinStructure::periodic;
    bool gauge_reduce = false;
    std::vector<cplx> r_grid;  // empty = per-experiment default
    double tolerance = 0.0;    // 0 = per-experiment default
    int quadrature_steps = 32;
    int jmax = 20;
};

// flat sectioned key-value format; see README for the grammar
ExperimentSpec parse_config(std::string_view text);

// the known experiment names, for validation and usage text
const std::vector<std::string>& experiment_names();

}  // namespace flateta
