#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hddc/linalg.hpp"

namespace hddc {

enum class Family { FreeOrientation, CommonOrientation, CommonCovariance, Baseline };

// How the subspace eigenvalues a are shared.
enum class AStructure {
    PerClassPerDim,  // a_ij
    PerDimShared,    // a_j  (requires common d)
    PerClass,        // a_i
    Global           // a
};

enum class BStructure { PerClass, Global };  // b_i / b
enum class DStructure { PerClass, Common };  // d_i / d

enum class BaselineKind { Full, Com, Diag, Sphe };

// One row of the model catalog. Use hddc_model() / baseline_model() /
// parse_model() to construct; they enforce admissibility.
struct ModelKind {
    Family family = Family::FreeOrientation;
    AStructure a_structure = AStructure::PerClassPerDim;
    BStructure b_structure = BStructure::PerClass;
    DStructure d_structure = DStructure::PerClass;
    BaselineKind baseline_kind = BaselineKind::Full;

    bool is_baseline() const { return family == Family::Baseline; }
    bool common_d() const {
        return is_baseline() || d_structure == DStructure::Common;
    }
    bool shared_orientation() const {
        return family == Family::CommonOrientation ||
               family == Family::CommonCovariance;
    }

    friend bool operator==(const ModelKind& l, const ModelKind& r) {
        if (l.family != r.family) return false;
        if (l.family == Family::Baseline)
            return l.baseline_kind == r.baseline_kind;
        return l.a_structure == r.a_structure &&
               l.b_structure == r.b_structure && l.d_structure == r.d_structure;
    }
    friend bool operator!=(const ModelKind& l, const ModelKind& r) {
        return !(l == r);
    }
};

namespace detail {

inline std::string a_token(AStructure a) {
    switch (a) {
        case AStructure::PerClassPerDim: return "a_ij";
        case AStructure::PerDimShared: return "a_j";
        case AStructure::PerClass: return "a_i";
        case AStructure::Global: return "a";
    }
    return "?";
}

}  // namespace detail

// Bracket notation; tokens carrying a subscript are followed by a space,
// e.g. "[a_i b_i Q_i d_i]", "[ab_i Qd]", "[abQd]".
inline std::string model_name(const ModelKind& m) {
    if (m.family == Family::Baseline) {
        switch (m.baseline_kind) {
            case BaselineKind::Full: return "Full-GMM";
            case BaselineKind::Com: return "Com-GMM";
            case BaselineKind::Diag: return "Diag-GMM";
            case BaselineKind::Sphe: return "Sphe-GMM";
        }
    }
    std::vector<std::string> tokens;
    tokens.push_back(detail::a_token(m.a_structure));
    tokens.push_back(m.b_structure == BStructure::PerClass ? "b_i" : "b");
    tokens.push_back(m.family == Family::FreeOrientation ? "Q_i" : "Q");
    tokens.push_back(m.d_structure == DStructure::PerClass ? "d_i" : "d");
    std::string s = "[";
    for (size_t i = 0; i < tokens.size(); ++i) {
        s += tokens[i];
        if (i + 1 < tokens.size() && tokens[i].find('_') != std::string::npos)
            s += ' ';
    }
    s += ']';
    return s;
}

inline ModelKind hddc_model(Family family, AStructure a, BStructure b,
                            DStructure d) {
    ModelKind m{family, a, b, d, BaselineKind::Full};
    switch (family) {
        case Family::FreeOrientation:
            if (a == AStructure::PerDimShared && d != DStructure::Common)
                throw InvalidInputError(
                    "model " + model_name(m) + ": a_j requires common d");
            break;
        case Family::CommonOrientation: {
            const bool retained =
                d == DStructure::Common &&
                ((a == AStructure::PerClass && b == BStructure::PerClass) ||
                 (a == AStructure::Global && b == BStructure::PerClass) ||
                 (a == AStructure::PerClass && b == BStructure::Global));
            if (!retained)
                throw InvalidInputError(
                    "model " + model_name(m) +
                    ": common-orientation variant reserved; its estimation "
                    "needs the FG algorithm and is not supported");
            break;
        }
        case Family::CommonCovariance:
            if (d != DStructure::Common || b != BStructure::Global ||
                (a != AStructure::PerDimShared && a != AStructure::Global))
                throw InvalidInputError("model " + model_name(m) +
                                        ": not a common-covariance model");
            break;
        case Family::Baseline:
            throw InvalidInputError("hddc_model: use baseline_model()");
    }
    return m;
}

inline ModelKind baseline_model(BaselineKind kind) {
    ModelKind m;
    m.family = Family::Baseline;
    m.baseline_kind = kind;
    return m;
}

// Full admissible catalog in report order: 14 free-orientation rows, the 3
// retained common-orientation rows, 2 common-covariance rows, 4 baselines.
inline std::vector<ModelKind> enumerate_models(
    std::optional<Family> filter = std::nullopt) {
    using A = AStructure;
    using B = BStructure;
    using D = DStructure;
    std::vector<ModelKind> all;
    const Family fo = Family::FreeOrientation;
    all.push_back(hddc_model(fo, A::PerClassPerDim, B::PerClass, D::PerClass));
    all.push_back(hddc_model(fo, A::PerClassPerDim, B::Global, D::PerClass));
    all.push_back(hddc_model(fo, A::PerClass, B::PerClass, D::PerClass));
    all.push_back(hddc_model(fo, A::Global, B::PerClass, D::PerClass));
    all.push_back(hddc_model(fo, A::PerClass, B::Global, D::PerClass));
    all.push_back(hddc_model(fo, A::Global, B::Global, D::PerClass));
    all.push_back(hddc_model(fo, A::PerClassPerDim, B::PerClass, D::Common));
    all.push_back(hddc_model(fo, A::PerDimShared, B::PerClass, D::Common));
    all.push_back(hddc_model(fo, A::PerClassPerDim, B::Global, D::Common));
    all.push_back(hddc_model(fo, A::PerDimShared, B::Global, D::Common));
    all.push_back(hddc_model(fo, A::PerClass, B::PerClass, D::Common));
    all.push_back(hddc_model(fo, A::Global, B::PerClass, D::Common));
    all.push_back(hddc_model(fo, A::PerClass, B::Global, D::Common));
    all.push_back(hddc_model(fo, A::Global, B::Global, D::Common));
    const Family co = Family::CommonOrientation;
    all.push_back(hddc_model(co, A::PerClass, B::PerClass, D::Common));
    all.push_back(hddc_model(co, A::Global, B::PerClass, D::Common));
    all.push_back(hddc_model(co, A::PerClass, B::Global, D::Common));
    const Family cc = Family::CommonCovariance;
    all.push_back(hddc_model(cc, A::PerDimShared, B::Global, D::Common));
    all.push_back(hddc_model(cc, A::Global, B::Global, D::Common));
    all.push_back(baseline_model(BaselineKind::Full));
    all.push_back(baseline_model(BaselineKind::Com));
    all.push_back(baseline_model(BaselineKind::Diag));
    all.push_back(baseline_model(BaselineKind::Sphe));
    if (!filter) return all;
    std::vector<ModelKind> out;
    for (const auto& m : all)
        if (m.family == *filter) out.push_back(m);
    return out;
}

namespace detail {

inline std::string strip_ws(const std::string& s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

}  // namespace detail

// Exact-match parsing, whitespace-insensitive inside brackets. Names of the
// reserved common-orientation variants are recognized but refused.
inline ModelKind parse_model(const std::string& name) {
    const std::string key = detail::strip_ws(name);
    for (const auto& m : enumerate_models())
        if (key == detail::strip_ws(model_name(m))) return m;

    if (!key.empty() && key.front() == '[' && key.back() == ']') {
        // Recognize reserved common-orientation rows like [a_ij b_i Qd_i]:
        // a body containing "Q" (not "Q_i") that is not in the catalog.
        if (key.find("Q_i") == std::string::npos &&
            key.find('Q') != std::string::npos)
            throw InvalidInputError(
                "model " + name +
                ": common-orientation variant reserved; its estimation needs "
                "the FG algorithm and is not supported");
    }
    throw InvalidInputError("unknown model name: " + name);
}

// ---------------------------------------------------------------------------
// Parameter counting (catalog column "number of parameters")
// ---------------------------------------------------------------------------

struct ParamCountInputs {
    int k = 0;
    int p = 0;
    std::vector<int> dims;  // one d per component (equal entries if common d)
};

namespace detail {

// d * (p - (d+1)/2), the free parameters of a p x d orthonormal frame.
inline long orientation_params(long d, long p) { return d * (2 * p - d - 1) / 2; }

}  // namespace detail

inline long param_count(const ModelKind& model, const ParamCountInputs& in) {
    const long k = in.k, p = in.p;
    if (k < 1 || p < 1) throw InvalidInputError("param_count: bad k or p");
    const long rho = k * p + k - 1;

    if (model.family == Family::Baseline) {
        switch (model.baseline_kind) {
            case BaselineKind::Full: return rho + k * p * (p + 1) / 2;
            case BaselineKind::Com: return rho + p * (p + 1) / 2;
            case BaselineKind::Diag: return rho + k * p;
            case BaselineKind::Sphe: return rho + k;
        }
    }

    if (static_cast<long>(in.dims.size()) != k)
        throw InvalidInputError("param_count: dims size != k");
    for (int d : in.dims)
        if (d < 1 || d > p - 1)
            throw InvalidInputError("param_count: d out of [1, p-1]");
    if (model.common_d() &&
        !std::all_of(in.dims.begin(), in.dims.end(),
                     [&](int d) { return d == in.dims[0]; }))
        throw InvalidInputError("param_count: common-d model with unequal dims");

    long tau_bar = 0, big_d = 0;
    for (int di : in.dims) {
        tau_bar += detail::orientation_params(di, p);
        big_d += di;
    }
    const long d = in.dims[0];
    const long tau = detail::orientation_params(d, p);

    using A = AStructure;
    using B = BStructure;
    const bool bi = model.b_structure == B::PerClass;

    switch (model.family) {
        case Family::FreeOrientation:
            if (model.d_structure == DStructure::PerClass) {
                switch (model.a_structure) {
                    case A::PerClassPerDim:
                        return bi ? rho + tau_bar + 2 * k + big_d
                                  : rho + tau_bar + k + big_d + 1;
                    case A::PerClass:
                        return bi ? rho + tau_bar + 3 * k
                                  : rho + tau_bar + 2 * k + 1;
                    case A::Global:
                        return bi ? rho + tau_bar + 2 * k + 1
                                  : rho + tau_bar + k + 2;
                    case A::PerDimShared:
                        throw InvalidInputError("param_count: a_j needs common d");
                }
            } else {
                switch (model.a_structure) {
                    case A::PerClassPerDim:
                        return bi ? rho + k * (tau + d + 1) + 1
                                  : rho + k * (tau + d) + 2;
                    case A::PerDimShared:
                        return bi ? rho + k * (tau + 1) + d + 1
                                  : rho + k * tau + d + 2;
                    case A::PerClass:
                        return bi ? rho + k * (tau + 2) + 1
                                  : rho + k * (tau + 1) + 2;
                    case A::Global:
                        return bi ? rho + k * (tau + 1) + 2 : rho + k * tau + 3;
                }
            }
            break;
        case Family::CommonOrientation:
            switch (model.a_structure) {
                case A::PerClass:
                    return bi ? rho + tau + 2 * k + 1 : rho + tau + k + 2;
                case A::Global: return rho + tau + k + 2;
                default: break;
            }
            break;
        case Family::CommonCovariance:
            return model.a_structure == A::PerDimShared ? rho + tau + d + 2
                                                        : rho + tau + 3;
        case Family::Baseline: break;
    }
    throw InvalidInputError("param_count: inadmissible model");
}

// ---------------------------------------------------------------------------
// Fitted-parameter containers
// ---------------------------------------------------------------------------

struct ComponentParams {
    double pi = 0.0;
    Vector mu;
    Matrix q_tilde;  // p x d, orthonormal columns
    Vector a;        // d subspace eigenvalues, descending
    double b = 0.0;  // noise eigenvalue
    int d() const { return static_cast<int>(a.size()); }
};

struct MixtureParams {
    int k = 0;
    int p = 0;
    std::vector<ComponentParams> comps;
};

// Classical per-kind covariance payloads for the reference mixtures.
struct BaselineParams {
    BaselineKind kind = BaselineKind::Full;
    int k = 0;
    int p = 0;
    std::vector<double> pi;
    std::vector<Vector> mu;
    std::vector<Matrix> cov;       // Full: k matrices; Com: 1 shared
    std::vector<Vector> diag_var;  // Diag: k variance vectors
    std::vector<double> sphe_var;  // Sphe: k scalars
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_params(const MixtureParams& params,
                                        const ModelKind& model) {
    ValidationReport rep;
    auto fail = [&](const std::string& msg) { rep.violations.push_back(msg); };
    if (model.is_baseline()) {
        fail("baseline models carry BaselineParams, not MixtureParams");
        return rep;
    }
    if (params.k < 1 || static_cast<int>(params.comps.size()) != params.k) {
        fail("component count mismatch");
        return rep;
    }
    const int p = params.p;
    double pi_sum = 0.0;
    for (int i = 0; i < params.k; ++i) {
        const auto& c = params.comps[i];
        const std::string tag = "component " + std::to_string(i) + ": ";
        pi_sum += c.pi;
        if (!(c.pi > 0.0) || !(c.pi < 1.0 + 1e-12))
            fail(tag + "proportion outside (0,1)");
        if (c.mu.size() != p) fail(tag + "mean length != p");
        const int d = c.d();
        if (d < 1 || d > p - 1) fail(tag + "d outside [1, p-1]");
        if (c.q_tilde.rows() != p || c.q_tilde.cols() != d)
            fail(tag + "orientation shape mismatch");
        else {
            Matrix gram = c.q_tilde.transpose() * c.q_tilde;
            if ((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
                fail(tag + "orientation columns not orthonormal");
        }
        if (!(c.b > 0.0)) fail(tag + "b not positive");
        for (int j = 0; j < d; ++j) {
            if (j + 1 < d && c.a(j) < c.a(j + 1) - 1e-12)
                fail(tag + "a not descending");
            if (c.a(j) < c.b - 1e-12) fail(tag + "a below b");
        }
    }
    if (std::abs(pi_sum - 1.0) > 1e-12) fail("proportions do not sum to 1");

    // Sharing constraints of the owning model.
    const auto& c0 = params.comps[0];
    for (int i = 1; i < params.k; ++i) {
        const auto& c = params.comps[i];
        if (model.common_d() && c.d() != c0.d())
            fail("common-d model with unequal dims");
        if (model.b_structure == BStructure::Global && c.b != c0.b)
            fail("global-b model with unequal b");
        if (model.shared_orientation() &&
            (c.q_tilde.rows() != c0.q_tilde.rows() ||
             c.q_tilde.cols() != c0.q_tilde.cols() || c.q_tilde != c0.q_tilde))
            fail("shared-orientation model with unequal orientations");
        if ((model.a_structure == AStructure::Global ||
             model.a_structure == AStructure::PerDimShared) &&
            (c.a.size() != c0.a.size() || c.a != c0.a))
            fail("shared-a model with unequal a");
    }
    for (int i = 0; i < params.k; ++i) {
        const auto& c = params.comps[i];
        if ((model.a_structure == AStructure::PerClass ||
             model.a_structure == AStructure::Global) &&
            c.a.size() > 0 && (c.a.array() != c.a(0)).any())
            fail("scalar-a model with non-constant a within component " +
                 std::to_string(i));
    }
    return rep;
}

}  // namespace hddc
