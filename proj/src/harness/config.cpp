#include "polarsim/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace polarsim::harness {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ConfigInvalid, "field '" + field + "': " + why);
}

std::string scalar(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) invalid(field, "expected a scalar");
    return node.Scalar();
}

double as_double(const YAML::Node& node, const std::string& field) {
    const std::string s = scalar(node, field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        invalid(field, "expected a finite number, got '" + s + "'");
    return v;
}

std::uint64_t as_u64(const YAML::Node& node, const std::string& field) {
    const std::string s = scalar(node, field);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        invalid(field, "expected a non-negative integer, got '" + s + "'");
    return v;
}

bool as_bool(const YAML::Node& node, const std::string& field) {
    const std::string s = scalar(node, field);
    if (s == "true") return true;
    if (s == "false") return false;
    invalid(field, "expected true or false, got '" + s + "'");
}

std::vector<double> as_vector(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence()) invalid(field, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(as_double(node[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::vector<double>> as_matrix(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence()) invalid(field, "expected a list of lists");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(as_vector(node[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
    if (!node.IsMap()) invalid(where.empty() ? "<root>" : where, "expected a mapping");
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.contains(key)) invalid(where.empty() ? key : where + "." + key, "unknown key");
    }
}

ModelKind model_kind(const std::string& s, const std::string& field) {
    if (s == "hjmr") return ModelKind::Hjmr;
    if (s == "signed-hjmr") return ModelKind::SignedHjmr;
    if (s == "party") return ModelKind::Party;
    invalid(field, "unknown model '" + s + "' (hjmr, signed-hjmr, party)");
}

DistributionKind distribution_kind(const std::string& s, const std::string& field) {
    if (s == "haar") return DistributionKind::Haar;
    if (s == "axial-tilt") return DistributionKind::AxialTilt;
    if (s == "finite-support") return DistributionKind::FiniteSupport;
    if (s == "orthonormal-basis") return DistributionKind::OrthonormalBasis;
    invalid(field, "unknown distribution '" + s + "' (haar, axial-tilt, finite-support, orthonormal-basis)");
}

InitKind init_kind(const std::string& s, const std::string& field) {
    if (s == "haar_random") return InitKind::HaarRandom;
    if (s == "explicit") return InitKind::Explicit;
    if (s == "polarized") return InitKind::Polarized;
    if (s == "equal_support_random") return InitKind::EqualSupportRandom;
    invalid(field, "unknown init '" + s + "' (haar_random, explicit, polarized, equal_support_random)");
}

std::string number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void emit_vector(YAML::Emitter& out, const std::vector<double>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out << number(x);
    out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const std::vector<std::vector<double>>& m) {
    out << YAML::BeginSeq;
    for (const auto& row : m) emit_vector(out, row);
    out << YAML::EndSeq;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Hjmr: return "hjmr";
        case ModelKind::SignedHjmr: return "signed-hjmr";
        case ModelKind::Party: return "party";
    }
    return "?";
}

std::string to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::Haar: return "haar";
        case DistributionKind::AxialTilt: return "axial-tilt";
        case DistributionKind::FiniteSupport: return "finite-support";
        case DistributionKind::OrthonormalBasis: return "orthonormal-basis";
    }
    return "?";
}

std::string to_string(InitKind kind) {
    switch (kind) {
        case InitKind::HaarRandom: return "haar_random";
        case InitKind::Explicit: return "explicit";
        case InitKind::Polarized: return "polarized";
        case InitKind::EqualSupportRandom: return "equal_support_random";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("malformed YAML: ") + e.what());
    }
    check_keys(root, "",
               {"name", "model", "distribution", "n", "d", "init", "steps", "replicas", "master_seed",
                "epsilon_grid", "tail_fraction", "record_every", "series_stride", "record_phi", "outputs"});

    ExperimentConfig c;
    if (root["name"]) c.name = scalar(root["name"], "name");
    if (root["n"]) c.n = as_u64(root["n"], "n");
    if (root["d"]) c.d = as_u64(root["d"], "d");
    if (root["steps"]) c.steps = as_u64(root["steps"], "steps");
    if (root["replicas"]) c.replicas = as_u64(root["replicas"], "replicas");
    if (root["master_seed"]) c.master_seed = as_u64(root["master_seed"], "master_seed");
    if (root["epsilon_grid"]) c.epsilon_grid = as_vector(root["epsilon_grid"], "epsilon_grid");
    if (root["tail_fraction"]) c.tail_fraction = as_double(root["tail_fraction"], "tail_fraction");
    if (root["record_every"]) c.record_every = as_u64(root["record_every"], "record_every");
    if (root["series_stride"]) c.series_stride = as_u64(root["series_stride"], "series_stride");
    if (root["record_phi"]) c.record_phi = as_bool(root["record_phi"], "record_phi");
    if (root["outputs"]) c.outputs = scalar(root["outputs"], "outputs");

    if (const YAML::Node m = root["model"]) {
        check_keys(m, "model", {"kind", "eta", "influence"});
        if (!m["kind"]) invalid("model.kind", "required");
        c.model.kind = model_kind(scalar(m["kind"], "model.kind"), "model.kind");
        if (m["eta"]) c.model.eta = as_double(m["eta"], "model.eta");
        if (m["influence"]) c.model.influence = as_matrix(m["influence"], "model.influence");
    }
    if (const YAML::Node dn = root["distribution"]) {
        check_keys(dn, "distribution", {"kind", "axis", "strength", "atoms", "probs"});
        if (!dn["kind"]) invalid("distribution.kind", "required");
        c.distribution.kind = distribution_kind(scalar(dn["kind"], "distribution.kind"), "distribution.kind");
        if (dn["axis"]) c.distribution.axis = as_vector(dn["axis"], "distribution.axis");
        if (dn["strength"]) c.distribution.strength = as_double(dn["strength"], "distribution.strength");
        if (dn["atoms"]) c.distribution.atoms = as_matrix(dn["atoms"], "distribution.atoms");
        if (dn["probs"]) c.distribution.probs = as_vector(dn["probs"], "distribution.probs");
    }
    if (const YAML::Node in = root["init"]) {
        check_keys(in, "init", {"kind", "vectors"});
        if (!in["kind"]) invalid("init.kind", "required");
        c.init.kind = init_kind(scalar(in["kind"], "init.kind"), "init.kind");
        if (in["vectors"]) c.init.vectors = as_matrix(in["vectors"], "init.vectors");
    }
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(c.model.kind);
    out << YAML::Key << "eta" << YAML::Value << number(c.model.eta);
    if (!c.model.influence.empty()) {
        out << YAML::Key << "influence" << YAML::Value;
        emit_matrix(out, c.model.influence);
    }
    out << YAML::EndMap;

    out << YAML::Key << "distribution" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(c.distribution.kind);
    if (!c.distribution.axis.empty()) {
        out << YAML::Key << "axis" << YAML::Value;
        emit_vector(out, c.distribution.axis);
    }
    out << YAML::Key << "strength" << YAML::Value << number(c.distribution.strength);
    if (!c.distribution.atoms.empty()) {
        out << YAML::Key << "atoms" << YAML::Value;
        emit_matrix(out, c.distribution.atoms);
    }
    if (!c.distribution.probs.empty()) {
        out << YAML::Key << "probs" << YAML::Value;
        emit_vector(out, c.distribution.probs);
    }
    out << YAML::EndMap;

    out << YAML::Key << "n" << YAML::Value << c.n;
    out << YAML::Key << "d" << YAML::Value << c.d;
    out << YAML::Key << "init" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(c.init.kind);
    if (!c.init.vectors.empty()) {
        out << YAML::Key << "vectors" << YAML::Value;
        emit_matrix(out, c.init.vectors);
    }
    out << YAML::EndMap;
    out << YAML::Key << "steps" << YAML::Value << c.steps;
    out << YAML::Key << "replicas" << YAML::Value << c.replicas;
    out << YAML::Key << "master_seed" << YAML::Value << c.master_seed;
    out << YAML::Key << "epsilon_grid" << YAML::Value;
    emit_vector(out, c.epsilon_grid);
    out << YAML::Key << "tail_fraction" << YAML::Value << number(c.tail_fraction);
    out << YAML::Key << "record_every" << YAML::Value << c.record_every;
    out << YAML::Key << "series_stride" << YAML::Value << c.series_stride;
    out << YAML::Key << "record_phi" << YAML::Value << (c.record_phi ? "true" : "false");
    out << YAML::Key << "outputs" << YAML::Value << YAML::DoubleQuoted << c.outputs;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void validate_config(const ExperimentConfig& c) {
    if (c.name.empty()) invalid("name", "must not be empty");
    if (c.n < 1) invalid("n", "must be >= 1");
    if (c.d < 2) invalid("d", "must be >= 2");
    if (c.replicas < 1) invalid("replicas", "must be >= 1");
    if (c.series_stride < 1) invalid("series_stride", "must be >= 1");
    if (c.epsilon_grid.empty()) invalid("epsilon_grid", "must list at least one epsilon");
    for (std::size_t i = 0; i < c.epsilon_grid.size(); ++i)
        if (!(c.epsilon_grid[i] > 0.0)) invalid("epsilon_grid[" + std::to_string(i) + "]", "must be > 0");
    if (!(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0)) invalid("tail_fraction", "must lie in (0, 1]");
    if (c.outputs.empty()) invalid("outputs", "must not be empty");

    if (c.model.kind == ModelKind::Party) {
        if (c.model.influence.size() != c.n) invalid("model.influence", "party needs n rows");
        for (std::size_t i = 0; i < c.n; ++i) {
            const std::string f = "model.influence[" + std::to_string(i) + "]";
            if (c.model.influence[i].size() != c.n) invalid(f, "must have n entries");
            for (double w : c.model.influence[i])
                if (!(w >= 0.0)) invalid(f, "weights must be >= 0");
        }
    } else {
        if (!(c.model.eta > 0.0)) invalid("model.eta", "must be > 0");
        if (!c.model.influence.empty()) invalid("model.influence", "only party models take an influence matrix");
    }

    const auto& dist = c.distribution;
    switch (dist.kind) {
        case DistributionKind::Haar:
        case DistributionKind::OrthonormalBasis: break;
        case DistributionKind::AxialTilt:
            if (dist.axis.size() != c.d) invalid("distribution.axis", "must have d entries");
            if (norm(dist.axis) < kZeroNormThreshold) invalid("distribution.axis", "must be nonzero");
            if (!(dist.strength >= 0.0 && dist.strength < 1.0))
                invalid("distribution.strength", "must lie in [0, 1)");
            break;
        case DistributionKind::FiniteSupport: {
            if (dist.atoms.empty()) invalid("distribution.atoms", "must list at least one atom");
            if (dist.probs.size() != dist.atoms.size()) invalid("distribution.probs", "need one per atom");
            double total = 0.0;
            for (std::size_t i = 0; i < dist.atoms.size(); ++i) {
                const std::string f = "distribution.atoms[" + std::to_string(i) + "]";
                if (dist.atoms[i].size() != c.d) invalid(f, "must have d entries");
                if (std::abs(norm(dist.atoms[i]) - 1.0) > kUnitNormTolerance) invalid(f, "must be a unit vector");
                if (!(dist.probs[i] >= 0.0))
                    invalid("distribution.probs[" + std::to_string(i) + "]", "must be >= 0");
                total += dist.probs[i];
            }
            if (std::abs(total - 1.0) > 1e-12) invalid("distribution.probs", "must sum to 1");
            break;
        }
    }
    if (dist.kind != DistributionKind::AxialTilt && !dist.axis.empty())
        invalid("distribution.axis", "only axial-tilt takes an axis");
    if (dist.kind != DistributionKind::FiniteSupport && (!dist.atoms.empty() || !dist.probs.empty()))
        invalid("distribution.atoms", "only finite-support takes atoms");

    if (c.init.kind == InitKind::Explicit) {
        if (c.init.vectors.size() != c.n) invalid("init.vectors", "explicit init needs n vectors");
        for (std::size_t i = 0; i < c.n; ++i) {
            const std::string f = "init.vectors[" + std::to_string(i) + "]";
            if (c.init.vectors[i].size() != c.d) invalid(f, "must have d entries");
            if (norm(c.init.vectors[i]) < kZeroNormThreshold) invalid(f, "must be nonzero");
        }
    } else if (!c.init.vectors.empty()) {
        invalid("init.vectors", "only explicit init takes vectors");
    }
    if (c.init.kind == InitKind::EqualSupportRandom && c.d > 63)
        invalid("init.kind", "equal_support_random supports d <= 63");
}

std::size_t effective_record_every(const ExperimentConfig& c) {
    return c.record_every == 0 ? default_record_every(c.steps) : c.record_every;
}

ModelSpec build_model(const ExperimentConfig& c) {
    switch (c.model.kind) {
        case ModelKind::Hjmr: return Hjmr{c.model.eta};
        case ModelKind::SignedHjmr: return SignedHjmr{c.model.eta};
        case ModelKind::Party: {
            std::vector<double> flat;
            for (const auto& row : c.model.influence) flat.insert(flat.end(), row.begin(), row.end());
            return Party{InfluenceMatrix(c.n, std::move(flat))};
        }
    }
    throw Error(ErrorCode::ConfigInvalid, "field 'model.kind': unhandled");
}

IssueDistribution build_distribution(const ExperimentConfig& c) {
    const auto& dist = c.distribution;
    switch (dist.kind) {
        case DistributionKind::Haar: return HaarUniform{c.d};
        case DistributionKind::AxialTilt: return axial_tilt(project_to_sphere(dist.axis), dist.strength);
        case DistributionKind::OrthonormalBasis: return orthonormal_basis(c.d);
        case DistributionKind::FiniteSupport: {
            FiniteSupport fs;
            for (const auto& a : dist.atoms) fs.atoms.push_back(project_to_sphere(a));
            fs.probs = dist.probs;
            return fs;
        }
    }
    throw Error(ErrorCode::ConfigInvalid, "field 'distribution.kind': unhandled");
}

InitialState initial_configuration(const ExperimentConfig& c, RngStream& rng) {
    InitialState out;
    std::vector<UnitVector> agents;
    switch (c.init.kind) {
        case InitKind::HaarRandom:
            for (std::size_t i = 0; i < c.n; ++i) agents.push_back(rng.haar(c.d));
            break;
        case InitKind::Explicit:
            for (const auto& v : c.init.vectors) {
                out.normalized = out.normalized || std::abs(norm(v) - 1.0) > kUnitNormTolerance;
                agents.push_back(project_to_sphere(v));
            }
            break;
        case InitKind::Polarized: {
            const UnitVector u = rng.haar(c.d);
            agents.push_back(u);
            for (std::size_t i = 1; i < c.n; ++i) agents.push_back(rng.below(2) == 0 ? u : u.negated());
            break;
        }
        case InitKind::EqualSupportRandom: {
            // uniform over coordinate subsets of size >= 2
            std::uint64_t mask = 0;
            do {
                mask = rng.next_u64() & ((std::uint64_t{1} << c.d) - 1);
            } while (std::popcount(mask) < 2);
            std::vector<double> v(c.d);
            for (;;) {
                agents.clear();
                for (std::size_t i = 0; i < c.n; ++i) {
                    double sq = 0.0;
                    do {
                        sq = 0.0;
                        for (std::size_t k = 0; k < c.d; ++k) {
                            v[k] = ((mask >> k) & 1u) ? rng.normal() : 0.0;
                            sq += v[k] * v[k];
                        }
                    } while (sq < 1e-12);
                    agents.push_back(project_to_sphere(v));
                }
                bool sign_equal = false;
                for (std::size_t i = 0; i < c.n && !sign_equal; ++i)
                    for (std::size_t j = i + 1; j < c.n && !sign_equal; ++j)
                        sign_equal = std::abs(dot(agents[i].coords(), agents[j].coords())) > 1.0 - 1e-12;
                if (!sign_equal) break;
            }
            break;
        }
    }
    out.x0 = Configuration(agents);
    return out;
}

}  // namespace polarsim::harness
