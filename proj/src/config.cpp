#include "rubbernet/config.hpp"

#include "rubbernet/delaunay.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rubbernet {

namespace {

using nlohmann::json;

// Object reader that records which keys were consumed, so leftovers can be
// reported as unknown.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            fail("expected an object");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    Node child(const std::string& key) { return Node(raw(key), path_ + "." + key); }

    template <class T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) {
            return fallback;
        }
        return as<T>(raw(key), path_ + "." + key);
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) {
                throw ConfigError("unknown config key " + path_ + "." + it.key());
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

    template <class T>
    static T as(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) {
                throw ConfigError(where + ": expected a boolean");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                throw ConfigError(where + ": expected an integer");
            }
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_integer() && !v.is_number_unsigned()) {
                    throw ConfigError(where + ": expected a non-negative integer");
                }
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ConfigError(where + ": expected a number");
            }
        } else {
            if (!v.is_string()) {
                throw ConfigError(where + ": expected a string");
            }
        }
        return v.get<T>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Diagonal parse_diagonal(const std::string& s, const std::string& where) {
    if (s == "nw") {
        return Diagonal::nw;
    }
    if (s == "ne") {
        return Diagonal::ne;
    }
    throw ConfigError(where + ": diagonal must be \"nw\" or \"ne\"");
}

Mat parse_matrix(const json& v, const std::string& where) {
    if (!v.is_array() || (v.size() != 2 && v.size() != 3)) {
        throw ConfigError(where + ": expected a 2x2 or 3x3 array of rows");
    }
    const int n = static_cast<int>(v.size());
    Mat m(n, n);
    for (int r = 0; r < n; ++r) {
        const json& row = v[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            throw ConfigError(where + ": rows must have " + std::to_string(n) + " entries");
        }
        for (int c = 0; c < n; ++c) {
            m(r, c) = Node::as<double>(row[static_cast<std::size_t>(c)], where);
        }
    }
    return m;
}

void parse_model(Node node, EnergyModel& model) {
    if (node.has("pair")) {
        Node pair = node.child("pair");
        const std::string type = pair.get<std::string>("type", "langevin");
        if (type == "langevin") {
            ChainParams p;
            p.k = pair.get("k", p.k);
            p.beta = pair.get("beta", p.beta);
            p.c = pair.get("c", p.c);
            p.n = pair.get("n", p.n);
            p.l = pair.get("l", p.l);
            model.pair = PairPotential::langevin(p);
        } else if (type == "quadratic") {
            model.pair = PairPotential::quadratic(pair.get("stiffness", 1.0));
        } else {
            pair.fail("type must be \"langevin\" or \"quadratic\"");
        }
        pair.finish();
    }
    model.f = node.get("f", model.f);
    if (node.has("volumetric") && !node.raw("volumetric").is_null()) {
        Node vol = node.child("volumetric");
        VolumetricParams v;
        v.bulk = vol.get("bulk", v.bulk);
        v.eta = vol.get("eta", v.eta);
        vol.finish();
        model.vol = v;
    }
    const std::string mode = node.get<std::string>("weight_mode", "uniform");
    if (mode == "uniform") {
        model.weight_mode = WeightMode::uniform;
    } else if (mode == "element_volume") {
        model.weight_mode = WeightMode::element_volume;
    } else {
        node.fail("weight_mode must be \"uniform\" or \"element_volume\"");
    }
    node.finish();
}

void parse_lattice(Node node, StochasticLatticeSpec& spec) {
    const std::string type = node.get<std::string>("type", "jittered-grid");
    if (type == "jittered-grid") {
        spec.kind = LatticeKind::jittered_grid;
    } else if (type == "matern-hardcore") {
        spec.kind = LatticeKind::matern_hardcore;
    } else {
        node.fail("type must be \"jittered-grid\" or \"matern-hardcore\"");
    }
    spec.intensity = node.get("intensity", spec.intensity);
    spec.r_min = node.get("r_min", spec.r_min);
    spec.r_cov = node.get("r_cov", spec.r_cov);
    node.finish();
}

void parse_mesh(Node node, MeshSpec& mesh) {
    const std::string kind = node.get<std::string>("kind", "periodic");
    if (kind == "periodic") {
        mesh.kind = MeshKind::periodic;
    } else if (kind == "stochastic") {
        mesh.kind = MeshKind::stochastic;
    } else {
        node.fail("kind must be \"periodic\" or \"stochastic\"");
    }
    mesh.dim = node.get("dim", mesh.dim);
    if (mesh.dim != 2 && mesh.dim != 3) {
        node.fail("dim must be 2 or 3");
    }
    mesh.m = node.get("m", mesh.m);
    if (mesh.m < 1) {
        node.fail("m must be >= 1");
    }
    mesh.diagonal = parse_diagonal(node.get<std::string>("diagonal", "nw"), node.where("diagonal"));
    if (node.has("lattice")) {
        parse_lattice(node.child("lattice"), mesh.lattice);
    }
    mesh.lattice.dim = mesh.dim;
    mesh.h = node.get("h", mesh.h);
    if (!(mesh.h > 0.0) || mesh.h > 1.0) {
        node.fail("h must lie in (0, 1]");
    }
    node.finish();
}

void parse_bc(Node node, RunConfig& cfg) {
    const std::string kind = node.get<std::string>("kind", "affine_layer");
    if (kind == "affine_layer") {
        cfg.bc.kind = BcKind::affine_layer;
    } else if (kind == "dirichlet_faces") {
        cfg.bc.kind = BcKind::dirichlet_faces;
    } else {
        node.fail("kind must be \"affine_layer\" or \"dirichlet_faces\"");
    }
    if (node.has("xi")) {
        cfg.bc.xi = parse_matrix(node.raw("xi"), node.where("xi"));
    }
    if (node.has("depth")) {
        const json& d = node.raw("depth");
        if (d.is_string() && d.get<std::string>() == "auto") {
            cfg.auto_depth = true;
        } else {
            cfg.bc.depth = Node::as<double>(d, node.where("depth"));
            if (!(cfg.bc.depth >= 0.0)) {
                node.fail("depth must be >= 0 or \"auto\"");
            }
            cfg.auto_depth = false;
        }
    }
    if (node.has("faces")) {
        const json& faces = node.raw("faces");
        if (!faces.is_array()) {
            node.fail("faces must be an array");
        }
        static const char* names[] = {"x0", "x1", "y0", "y1", "z0", "z1"};
        for (const json& f : faces) {
            const std::string name = Node::as<std::string>(f, node.where("faces"));
            const auto* it = std::find(std::begin(names), std::end(names), name);
            if (it == std::end(names)) {
                node.fail("unknown face " + name);
            }
            cfg.bc.faces.push_back(static_cast<Face>(it - std::begin(names)));
        }
    }
    node.finish();
}

void parse_solver(Node node, MinimizeSettings& s, bool& rel_set) {
    rel_set = node.has("rel_grad_tol");
    if (node.has("grad_tol") && !node.raw("grad_tol").is_null()) {
        s.grad_tol = Node::as<double>(node.raw("grad_tol"), node.where("grad_tol"));
    }
    s.rel_grad_tol = node.get("rel_grad_tol", s.rel_grad_tol);
    s.max_iters = node.get("max_iters", s.max_iters);
    s.memory = node.get("memory", s.memory);
    s.c1 = node.get("c1", s.c1);
    s.c2 = node.get("c2", s.c2);
    s.max_line_search = node.get("max_line_search", s.max_line_search);
    node.finish();
}

template <class T>
std::vector<T> parse_list(const json& v, const std::string& where) {
    if (!v.is_array()) {
        throw ConfigError(where + ": expected an array");
    }
    std::vector<T> out;
    for (const json& x : v) {
        out.push_back(Node::as<T>(x, where));
    }
    return out;
}

void parse_homogenize(Node node, HomogenizeSpec& h) {
    if (node.has("xi_list")) {
        const json& list = node.raw("xi_list");
        if (!list.is_array()) {
            node.fail("xi_list must be an array of matrices");
        }
        for (const json& m : list) {
            h.xi_list.push_back(parse_matrix(m, node.where("xi_list")));
        }
    }
    if (node.has("m_list")) {
        h.m_list = parse_list<int>(node.raw("m_list"), node.where("m_list"));
    }
    if (node.has("h_list")) {
        h.h_list = parse_list<double>(node.raw("h_list"), node.where("h_list"));
    }
    h.n_realizations = node.get("n_realizations", h.n_realizations);
    h.restarts = node.get("restarts", h.restarts);
    h.probe_rotations = node.get("probe_rotations", h.probe_rotations);
    if (h.n_realizations < 1 || h.restarts < 1 || h.probe_rotations < 0) {
        node.fail("need n_realizations >= 1, restarts >= 1, probe_rotations >= 0");
    }
    node.finish();
}

void parse_counterexample(Node node, CounterexampleSpec& c) {
    c.stiffness = node.get("stiffness", c.stiffness);
    c.f = node.get("f", c.f);
    c.m = node.get("m", c.m);
    c.diagonal = parse_diagonal(node.get<std::string>("diagonal", "nw"), node.where("diagonal"));
    node.finish();
}

void parse_lattice_check(Node node, LatticeCheckSpec& c) {
    c.box_side = node.get("box_side", c.box_side);
    c.max_radius_edge = node.get("max_radius_edge", c.max_radius_edge);
    if (!(c.box_side > 0.0) || !(c.max_radius_edge > 0.0)) {
        node.fail("box_side and max_radius_edge must be > 0");
    }
    node.finish();
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Node node(root, "config");
    if (node.has("model")) {
        parse_model(node.child("model"), cfg.model);
    }
    if (node.has("mesh")) {
        parse_mesh(node.child("mesh"), cfg.mesh);
    }
    cfg.mesh.lattice.dim = cfg.mesh.dim;
    cfg.bc.xi = identity(cfg.mesh.dim);
    if (node.has("bc")) {
        parse_bc(node.child("bc"), cfg);
    }
    if (cfg.bc.xi.rows() != cfg.mesh.dim) {
        throw ConfigError("config.bc.xi: size does not match mesh.dim");
    }
    if (node.has("solver")) {
        parse_solver(node.child("solver"), cfg.solver, cfg.rel_grad_tol_set);
    }
    if (node.has("homogenize")) {
        parse_homogenize(node.child("homogenize"), cfg.homogenize);
    }
    for (const Mat& xi : cfg.homogenize.xi_list) {
        if (xi.rows() != cfg.mesh.dim) {
            throw ConfigError("config.homogenize.xi_list: size does not match mesh.dim");
        }
    }
    if (node.has("counterexample")) {
        parse_counterexample(node.child("counterexample"), cfg.counterexample);
    }
    if (node.has("lattice_check")) {
        parse_lattice_check(node.child("lattice_check"), cfg.lattice_check);
    }
    cfg.write_deformed = node.get("write_deformed", cfg.write_deformed);
    cfg.output = node.get("output", cfg.output);
    cfg.seed = node.get<std::uint64_t>("seed", cfg.seed);
    cfg.jobs = node.get<unsigned>("jobs", cfg.jobs);
    node.finish();

    try {
        cfg.model.validate();
        cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    cfg.mesh.lattice.seed = cfg.seed;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

Mesh build_config_mesh(const RunConfig& config) {
    const MeshSpec& m = config.mesh;
    if (m.kind == MeshKind::periodic) {
        return m.dim == 2 ? periodic_mesh_2d(m.m, m.diagonal) : periodic_mesh_3d(m.m);
    }
    StochasticLatticeSpec spec = m.lattice;
    spec.seed = config.seed;
    const std::vector<double> raw = stochastic_lattice(spec, Box::cube(m.dim, 1.0 / m.h));
    return delaunay_triangulate(rescale_and_clip(raw, m.dim, m.h, Box::unit(m.dim)), m.dim);
}

double config_layer_depth(const RunConfig& config, const Mesh& mesh) {
    if (!config.auto_depth) {
        return config.bc.depth;
    }
    if (config.mesh.kind == MeshKind::periodic) {
        return 2.0 * mesh.h();
    }
    return 2.0 * config.mesh.h * config.mesh.lattice.covering_radius();
}

}  // namespace rubbernet
