#pragma once

// JSON run configuration for the command-line tool. Unknown keys are errors.

#include "rubbernet/assembly.hpp"
#include "rubbernet/homogenize.hpp"
#include "rubbernet/lattice.hpp"
#include "rubbernet/minimize.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rubbernet {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshSpec {
    MeshKind kind = MeshKind::periodic;
    int dim = 3;
    int m = 2;
    Diagonal diagonal = Diagonal::nw;
    StochasticLatticeSpec lattice;  // stochastic: points at unit scale, rescaled by h
    double h = 0.1;
};

struct HomogenizeSpec {
    std::vector<Mat> xi_list;
    std::vector<int> m_list;
    std::vector<double> h_list;
    int n_realizations = 1;
    int restarts = 1;
    int probe_rotations = 0;  // 0 skips the frame-invariance and isotropy probes
};

struct CounterexampleSpec {
    double stiffness = 1.0;
    double f = 1.0;
    int m = 1;
    Diagonal diagonal = Diagonal::nw;
};

struct LatticeCheckSpec {
    double box_side = 10.0;
    double max_radius_edge = 4.0;
};

struct RunConfig {
    EnergyModel model;
    MeshSpec mesh;
    BoundaryCondition bc;
    bool auto_depth = true;  // 2h (periodic) or 2hR (stochastic)
    MinimizeSettings solver;
    bool rel_grad_tol_set = false;  // else cell problems use cell_settings()
    HomogenizeSpec homogenize;
    CounterexampleSpec counterexample;
    LatticeCheckSpec lattice_check;
    bool write_deformed = false;
    std::string output = "out";
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

/// Throws ConfigError on malformed input or unknown keys.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Mesh described by the config (lattice seed = config seed).
Mesh build_config_mesh(const RunConfig& config);
double config_layer_depth(const RunConfig& config, const Mesh& mesh);

}  // namespace rubbernet
