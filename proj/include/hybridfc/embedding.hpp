#pragma once
// KG embedding models (TransE, ComplEx, QMult): storage, scoring, assertion
// embeddings, and TSV persistence.
//
// Vectors are stored flattened to reals. Layouts:
//   TransE   q reals                      [v1..vq]
//   ComplEx  q complex = 2q reals         [re1..req, im1..imq]
//   QMult    q quaternions = 4q reals     [w1,x1,y1,z1, w2,x2,y2,z2, ...]
// The same layouts are used inside assertion embeddings (subject ⊕ predicate
// ⊕ object), so downstream consumers see one canonical real vector.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridfc/errors.hpp"

namespace hybridfc {

enum class ModelKind { TransE, ComplEx, QMult };

inline int per_component_reals(ModelKind kind) {
    switch (kind) {
        case ModelKind::TransE: return 1;
        case ModelKind::ComplEx: return 2;
        case ModelKind::QMult: return 4;
    }
    throw ContractViolation("unknown model kind");
}

inline std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::TransE: return "transe";
        case ModelKind::ComplEx: return "complex";
        case ModelKind::QMult: return "qmult";
    }
    throw ContractViolation("unknown model kind");
}

inline ModelKind parse_model_kind(const std::string& name) {
    if (name == "transe") return ModelKind::TransE;
    if (name == "complex") return ModelKind::ComplEx;
    if (name == "qmult") return ModelKind::QMult;
    throw ConfigError("unknown embedding model '" + name +
                      "' (expected transe, complex, or qmult)");
}

namespace detail {
inline void check_equal_lengths(std::span<const double> s, std::span<const double> p,
                                std::span<const double> o, const char* fn) {
    if (s.size() != p.size() || s.size() != o.size())
        throw ContractViolation(std::string(fn) + ": vector length mismatch");
}
}  // namespace detail

// ‖(φs + φp) − φo‖₂. Lower = more plausible.
inline double score_transe(std::span<const double> s, std::span<const double> p,
                           std::span<const double> o) {
    detail::check_equal_lengths(s, p, o, "score_transe");
    double sq = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double d = s[i] + p[i] - o[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

// Re(Σⱼ φs[j]·φp[j]·conj(φo[j])). Layout [re block, im block]. Higher = more
// plausible.
inline double score_complex(std::span<const double> s, std::span<const double> p,
                            std::span<const double> o) {
    detail::check_equal_lengths(s, p, o, "score_complex");
    if (s.size() % 2 != 0)
        throw ContractViolation("score_complex: odd real length");
    std::size_t q = s.size() / 2;
    const double* sr = s.data(); const double* si = s.data() + q;
    const double* pr = p.data(); const double* pi = p.data() + q;
    const double* onr = o.data(); const double* oni = o.data() + q;
    double acc = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        double ar = sr[j] * pr[j] - si[j] * pi[j];
        double ai = sr[j] * pi[j] + si[j] * pr[j];
        acc += ar * onr[j] + ai * oni[j];
    }
    return acc;
}

// Component-wise Hamilton product a ⊗ b for (w,x,y,z) quadruples.
inline void hamilton_product(std::span<const double> a, std::span<const double> b,
                             std::span<double> out) {
    for (std::size_t j = 0; j + 3 < a.size(); j += 4) {
        double w1 = a[j], x1 = a[j + 1], y1 = a[j + 2], z1 = a[j + 3];
        double w2 = b[j], x2 = b[j + 1], y2 = b[j + 2], z2 = b[j + 3];
        out[j] = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2;
        out[j + 1] = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2;
        out[j + 2] = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2;
        out[j + 3] = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2;
    }
}

// (φs ⊗ φp) · φo over all 4q reals. Layout (w,x,y,z) per component. Higher =
// more plausible.
inline double score_qmult(std::span<const double> s, std::span<const double> p,
                          std::span<const double> o) {
    detail::check_equal_lengths(s, p, o, "score_qmult");
    if (s.size() % 4 != 0)
        throw ContractViolation("score_qmult: real length not a multiple of 4");
    std::vector<double> sp(s.size());
    hamilton_product(s, p, sp);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += sp[i] * o[i];
    return acc;
}

class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(ModelKind kind, int components)
        : kind_(kind), components_(components) {
        if (components <= 0) throw ConfigError("embedding dim must be positive");
    }

    ModelKind kind() const { return kind_; }
    int components() const { return components_; }
    // Reals per entity/relation vector (d in the assertion-embedding contract).
    int real_dim() const { return components_ * per_component_reals(kind_); }

    std::size_t entity_count() const { return entity_names_.size(); }
    std::size_t relation_count() const { return relation_names_.size(); }
    const std::vector<std::string>& entity_names() const { return entity_names_; }
    const std::vector<std::string>& relation_names() const { return relation_names_; }

    std::size_t add_entity(const std::string& iri) {
        auto [it, fresh] = entity_index_.try_emplace(iri, entity_names_.size());
        if (fresh) {
            entity_names_.push_back(iri);
            entity_data_.resize(entity_names_.size() * real_dim(), 0.0);
        }
        return it->second;
    }

    std::size_t add_relation(const std::string& iri) {
        auto [it, fresh] = relation_index_.try_emplace(iri, relation_names_.size());
        if (fresh) {
            relation_names_.push_back(iri);
            relation_data_.resize(relation_names_.size() * real_dim(), 0.0);
        }
        return it->second;
    }

    bool has_entity(const std::string& iri) const { return entity_index_.count(iri) > 0; }
    bool has_relation(const std::string& iri) const { return relation_index_.count(iri) > 0; }

    std::span<double> entity_row(std::size_t idx) {
        return {entity_data_.data() + idx * real_dim(), static_cast<std::size_t>(real_dim())};
    }
    std::span<const double> entity_row(std::size_t idx) const {
        return {entity_data_.data() + idx * real_dim(), static_cast<std::size_t>(real_dim())};
    }
    std::span<double> relation_row(std::size_t idx) {
        return {relation_data_.data() + idx * real_dim(), static_cast<std::size_t>(real_dim())};
    }
    std::span<const double> relation_row(std::size_t idx) const {
        return {relation_data_.data() + idx * real_dim(), static_cast<std::size_t>(real_dim())};
    }

    std::span<const double> entity(const std::string& iri) const {
        auto it = entity_index_.find(iri);
        if (it == entity_index_.end()) throw MissingEmbedding(iri);
        return entity_row(it->second);
    }

    std::span<const double> relation(const std::string& iri) const {
        auto it = relation_index_.find(iri);
        if (it == relation_index_.end()) throw MissingEmbedding(iri);
        return relation_row(it->second);
    }

    double score(std::span<const double> s, std::span<const double> p,
                 std::span<const double> o) const {
        switch (kind_) {
            case ModelKind::TransE: return score_transe(s, p, o);
            case ModelKind::ComplEx: return score_complex(s, p, o);
            case ModelKind::QMult: return score_qmult(s, p, o);
        }
        throw ContractViolation("unknown model kind");
    }

    double score(const std::string& s, const std::string& p, const std::string& o) const {
        return score(entity(s), relation(p), entity(o));
    }

    // True when a higher raw score means a more plausible triple (TransE uses
    // a distance, so lower is better there).
    bool higher_is_better() const { return kind_ != ModelKind::TransE; }

    // φ(s) ⊕ φ(p) ⊕ φ(o): real vector of length exactly 3·real_dim().
    std::vector<double> assertion_embedding(const std::string& s, const std::string& p,
                                            const std::string& o) const {
        std::span<const double> vs = entity(s);
        std::span<const double> vp = relation(p);
        std::span<const double> vo = entity(o);
        std::vector<double> out;
        out.reserve(3 * real_dim());
        out.insert(out.end(), vs.begin(), vs.end());
        out.insert(out.end(), vp.begin(), vp.end());
        out.insert(out.end(), vo.begin(), vo.end());
        return out;
    }

    bool all_finite() const {
        for (double v : entity_data_)
            if (!std::isfinite(v)) return false;
        for (double v : relation_data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    // Artifact metadata: embedded into the TSV headers.
    std::uint64_t seed = 0;
    std::string config_hash;

    void save(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        save_table(dir / "entities.tsv", entity_names_, entity_data_);
        save_table(dir / "relations.tsv", relation_names_, relation_data_);
    }

    static EmbeddingModel load(const std::filesystem::path& dir) {
        EmbeddingModel model;
        bool have_header = false;
        model.load_table(dir / "entities.tsv", /*entities=*/true, have_header);
        model.load_table(dir / "relations.tsv", /*entities=*/false, have_header);
        return model;
    }

private:
    static std::string fmt_double(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    void save_table(const std::filesystem::path& path,
                    const std::vector<std::string>& names,
                    const std::vector<double>& data) const {
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write " + path.string());
        out << "#model=" << model_kind_name(kind_) << " dim=" << components_
            << " seed=" << seed;
        if (!config_hash.empty()) out << " config_hash=" << config_hash;
        out << '\n';
        int d = real_dim();
        for (std::size_t i = 0; i < names.size(); ++i) {
            out << names[i];
            for (int j = 0; j < d; ++j)
                out << '\t' << fmt_double(data[i * d + j]);
            out << '\n';
        }
    }

    void parse_header(const std::string& line, const std::filesystem::path& path) {
        std::istringstream iss(line.substr(1));
        std::string token;
        bool has_model = false, has_dim = false;
        while (iss >> token) {
            std::size_t eq = token.find('=');
            if (eq == std::string::npos) continue;
            std::string key = token.substr(0, eq);
            std::string value = token.substr(eq + 1);
            if (key == "model") {
                kind_ = parse_model_kind(value);
                has_model = true;
            } else if (key == "dim") {
                components_ = std::stoi(value);
                has_dim = true;
            } else if (key == "seed") {
                seed = std::stoull(value);
            } else if (key == "config_hash") {
                config_hash = value;
            }
        }
        if (!has_model || !has_dim)
            throw ParseError("vector table header needs model= and dim=: " +
                             path.string(), 1, 1);
        if (components_ <= 0)
            throw ParseError("vector table dim must be positive: " + path.string(), 1, 1);
    }

    void load_table(const std::filesystem::path& path, bool entities,
                    bool& have_header) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open " + path.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            if (line[0] == '#') {
                if (!have_header) {
                    parse_header(line, path);
                    have_header = true;
                } else {
                    EmbeddingModel probe;
                    probe.parse_header(line, path);
                    if (probe.kind_ != kind_ || probe.components_ != components_)
                        throw ParseError("vector table headers disagree: " +
                                         path.string(), lineno, 1);
                }
                continue;
            }
            if (!have_header)
                throw ParseError("missing #model=... header: " + path.string(),
                                 lineno, 1);
            std::size_t tab = line.find('\t');
            if (tab == std::string::npos)
                throw ParseError("vector row needs iri<TAB>values", lineno, 1);
            std::string iri = line.substr(0, tab);
            std::size_t idx = entities ? add_entity(iri) : add_relation(iri);
            std::span<double> row = entities ? entity_row(idx) : relation_row(idx);
            std::size_t pos = tab + 1;
            int j = 0;
            while (pos <= line.size()) {
                std::size_t next = line.find('\t', pos);
                std::string cell = line.substr(pos, next == std::string::npos
                                                        ? std::string::npos
                                                        : next - pos);
                if (j >= real_dim())
                    throw ParseError("too many values for dim", lineno, pos + 1);
                try {
                    row[j++] = std::stod(cell);
                } catch (const std::exception&) {
                    throw ParseError("bad number '" + cell + "'", lineno, pos + 1);
                }
                if (next == std::string::npos) break;
                pos = next + 1;
            }
            if (j != real_dim())
                throw ParseError("row has " + std::to_string(j) + " values, expected " +
                                 std::to_string(real_dim()), lineno, 1);
        }
        if (!have_header)
            throw ParseError("missing #model=... header: " + path.string(), 1, 1);
    }

    ModelKind kind_ = ModelKind::TransE;
    int components_ = 0;
    std::vector<std::string> entity_names_, relation_names_;
    std::unordered_map<std::string, std::size_t> entity_index_, relation_index_;
    std::vector<double> entity_data_, relation_data_;
};

}  // namespace hybridfc
