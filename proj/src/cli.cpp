#include "fisherbound/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fisherbound/bounds.hpp"
#include "fisherbound/fisher.hpp"
#include "fisherbound/mle_lab.hpp"
#include "fisherbound/models.hpp"
#include "fisherbound/verify.hpp"

#ifndef FISHERBOUND_VERSION
#define FISHERBOUND_VERSION "0.0.0"
#endif

namespace fisherbound::cli {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kDenseQubitLimit = 4;
constexpr int kSimulateQubitLimit = 3;
constexpr int kSeparationQubitLimit = 60;

const std::vector<std::string> kCommands = {"bounds", "simulate", "fisher", "separation", "verify"};

// 1-based line of the first occurrence of "key" in the source text, 0 if unknown.
int line_of_key(const std::string &text, const std::string &key) {
    size_t pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) {
        return 0;
    }
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::string field_error(const std::string &text, const std::string &key, const std::string &msg) {
    int line = line_of_key(text, key);
    if (line > 0) {
        return fmt::format("line {}: field '{}': {}", line, key, msg);
    }
    return fmt::format("field '{}': {}", key, msg);
}

template <typename T>
void read_field(const json &j, const std::string &text, const char *key, T &dst, const char *type) {
    auto it = j.find(key);
    if (it == j.end()) {
        return;
    }
    try {
        if constexpr (std::is_same_v<T, uint64_t>) {
            if (!it->is_number_integer() || (it->is_number_integer() && it->get<int64_t>() < 0 && !it->is_number_unsigned())) {
                throw ConfigError(field_error(text, key, fmt::format("expected {}", type)));
            }
        } else if constexpr (std::is_same_v<T, int>) {
            if (!it->is_number_integer()) {
                throw ConfigError(field_error(text, key, fmt::format("expected {}", type)));
            }
        } else if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) {
                throw ConfigError(field_error(text, key, fmt::format("expected {}", type)));
            }
        }
        dst = it->get<T>();
    } catch (const json::exception &) {
        throw ConfigError(field_error(text, key, fmt::format("expected {}", type)));
    }
}

Scheme scheme_of(const RunConfig &c) {
    try {
        return parse_scheme(c.scheme);
    } catch (const std::exception &) {
        throw ConfigError(fmt::format("field 'scheme': unknown scheme '{}'", c.scheme));
    }
}

bool is_pauli(Scheme s) {
    return s == Scheme::EntangledPauli || s == Scheme::SeparablePauli || s == Scheme::TwoCopyBell;
}

Norm norm_of(const RunConfig &c) {
    try {
        return parse_norm(c.norm);
    } catch (const std::exception &) {
        throw ConfigError(fmt::format("field 'norm': expected linf or l2, got '{}'", c.norm));
    }
}

std::vector<double> resolve_probe(const RunConfig &c) {
    std::vector<std::array<double, 3>> bloch;
    if (!c.probe.empty()) {
        if (static_cast<int>(c.probe.size()) != c.n) {
            throw ConfigError(fmt::format("field 'probe': need {} Bloch vectors, got {}", c.n, c.probe.size()));
        }
        for (const auto &v : c.probe) {
            if (v.size() != 3) {
                throw ConfigError("field 'probe': each entry must be [rx, ry, rz]");
            }
            if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] > 1.0 + 1e-12) {
                throw ConfigError("field 'probe': Bloch vector longer than 1");
            }
            bloch.push_back({v[0], v[1], v[2]});
        }
    } else if (c.probe_preset == "uniform") {
        double s = 1.0 / std::sqrt(3.0);
        bloch.assign(c.n, {s, s, s});
    } else if (c.probe_preset == "z") {
        bloch.assign(c.n, {0.0, 0.0, 1.0});
    } else {
        throw ConfigError(fmt::format("field 'probe_preset': unknown preset '{}'", c.probe_preset));
    }
    return product_probe(bloch);
}

std::unique_ptr<StatModel> build_model(const RunConfig &c) {
    Scheme s = scheme_of(c);
    switch (s) {
    case Scheme::EntangledPauli:
        return entangled_pauli_model(c.n);
    case Scheme::TwoCopyBell:
        return two_copy_bell_model(c.n);
    case Scheme::SeparablePauli:
        return separable_pauli_model(c.n, resolve_probe(c));
    case Scheme::Multinomial:
    case Scheme::GaussianKnownVar:
    case Scheme::Poisson:
    case Scheme::Bernoulli: {
        ClassicalParams p;
        p.d = c.d;
        p.truncation = c.truncation;
        return classical_model(s, p);
    }
    }
    throw ConfigError("unsupported scheme");
}

std::vector<double> resolve_theta(const RunConfig &c, const StatModel &model) {
    Scheme s = model.scheme();
    int d = model.dim();
    std::vector<double> th;
    if (!c.theta.empty()) {
        if (static_cast<int>(c.theta.size()) != d) {
            throw ConfigError(fmt::format("field 'theta': expected {} values, got {}", d, c.theta.size()));
        }
        th = c.theta;
    } else if (c.theta_preset == "random") {
        Rng rng = make_stream(c.theta_seed, 0, 0);
        if (s == Scheme::EntangledPauli || s == Scheme::SeparablePauli) {
            th = random_channel_eigenvalues(c.n, rng);
        } else if (s == Scheme::TwoCopyBell) {
            th = random_real_state_moments_sq(c.n, rng);
        } else {
            th = random_interior_point(model, rng);
        }
    } else if (c.theta_preset == "depolarizing" || c.theta_preset == "identity") {
        if (!is_pauli(s)) {
            throw ConfigError(
                fmt::format("field 'theta_preset': '{}' applies to Pauli schemes only", c.theta_preset));
        }
        th.assign(d, c.theta_preset == "identity" ? 1.0 : 0.0);
    } else if (c.theta_preset == "default") {
        switch (s) {
        case Scheme::Bernoulli:
            th = {0.5};
            break;
        case Scheme::Multinomial:
            th.assign(d, 1.0 / (d + 1));
            break;
        case Scheme::Poisson:
            th = {2.0};
            break;
        default:
            th.assign(d, 0.0);
        }
    } else {
        throw ConfigError(fmt::format("field 'theta_preset': unknown preset '{}'", c.theta_preset));
    }
    try {
        model.check_domain(th);
    } catch (const std::exception &e) {
        throw ConfigError(fmt::format("field 'theta': {}", e.what()));
    }
    return th;
}

// --- output ---

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char ch : s) {
        q += ch;
        if (ch == '"') {
            q += '"';
        }
    }
    return q + "\"";
}

std::string cell_text(const Cell &c) {
    return std::visit(
        [](const auto &v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                return format_number(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, int64_t>) {
                return std::to_string(v);
            } else {
                return v;
            }
        },
        c);
}

json cell_json(const Cell &c) {
    return std::visit(
        [](const auto &v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (std::isfinite(v)) {
                    return v;
                }
                return format_number(v);
            } else {
                return v;
            }
        },
        c);
}

json report_header(const RunConfig &c) {
    return json{{"tool", "fisherbound"}, {"version", FISHERBOUND_VERSION}, {"seed", c.seed},
                {"config", config_to_json(c)}};
}

Cell num(double v) { return v; }
Cell integer(int64_t v) { return v; }

// --- commands ---

struct CommandResult {
    Table table;
    int code = kExitOk;
};

struct Coeffs {
    BoundCoefficients c;
    bool ok = false;
    std::string error;
};

Coeffs coefficients(const StatModel &model, std::span<const double> th, double eps, Norm norm, double be) {
    Coeffs out;
    CoefficientOptions opt;
    opt.norm = norm;
    opt.be_constant = be;
    try {
        out.c = estimate_coefficients(model, th, eps, opt);
        out.ok = true;
    } catch (const FimUndefined &e) {
        out.error = std::string("fim undefined: ") + e.what();
    }
    return out;
}

BoundResult failed_row(const char *id, const std::string &reason, double eps, double delta, int d) {
    BoundResult r;
    r.id = id;
    r.value = kNaN;
    r.applicable = false;
    r.reason = reason;
    r.epsilon = eps;
    r.delta = delta;
    r.d = d;
    return r;
}

template <typename F>
BoundResult guarded(const char *id, const Coeffs &k, double eps, double delta, int d, F fn) {
    if (!k.ok) {
        return failed_row(id, k.error, eps, delta, d);
    }
    try {
        return fn();
    } catch (const std::invalid_argument &e) {
        return failed_row(id, e.what(), eps, delta, d);
    }
}

constexpr double kGridMargin = 1e-3;

std::vector<std::vector<double>> grid_points(const RunConfig &c, const StatModel &model, std::span<const double> th) {
    std::vector<std::vector<double>> pts{std::vector<double>(th.begin(), th.end())};
    Rng rng = make_stream(c.seed, 0xB0B0, 0);
    for (int i = 0; i < c.grid_size; ++i) {
        pts.push_back(random_interior_point(model, rng, kGridMargin));
    }
    return pts;
}

const std::vector<std::string> kBoundColumns = {"theorem", "value", "applicable", "limiting_term", "reason",
                                                "provenance", "epsilon", "delta", "d", "norm"};

std::vector<Cell> bound_row(const BoundResult &r, const std::string &provenance, Norm norm) {
    return {r.id,
            num(r.value),
            r.applicable,
            r.limiting_term,
            r.reason,
            provenance,
            num(r.epsilon),
            num(r.delta),
            integer(r.d),
            std::string(norm_name(norm))};
}

CommandResult cmd_bounds(const RunConfig &c) {
    auto model = build_model(c);
    std::vector<double> th = resolve_theta(c, *model);
    Scheme s = model->scheme();
    Norm norm = norm_of(c);
    int d = model->dim();
    double eps = c.epsilon, delta = c.delta;

    Coeffs kinf = coefficients(*model, th, eps, Norm::Linf, c.be_constant);
    Coeffs kl2 = coefficients(*model, th, eps, Norm::L2, c.be_constant);
    auto prov = [](const Coeffs &k) { return k.ok ? k.c.provenance : std::string("none"); };

    CommandResult res;
    res.table.columns = kBoundColumns;
    auto &rows = res.table.rows;

    auto upper = [&](Norm nm, const Coeffs &k) -> std::pair<BoundResult, std::string> {
        const char *id = nm == Norm::Linf ? "theorem1" : "theorem3";
        if (c.grid_size > 0 && k.ok) {
            CoefficientOptions opt;
            opt.norm = nm;
            opt.be_constant = c.be_constant;
            GridBound g = upper_bound_over_grid(*model, grid_points(c, *model, th), eps, delta, opt);
            return {g.result, fmt::format("{}; sup over {} grid points, interior margin {}", prov(k), g.points_used, kGridMargin)};
        }
        BoundResult r = guarded(id, k, eps, delta, d, [&] {
            return nm == Norm::Linf ? theorem1_upper_linf(eps, delta, d, k.c) : theorem3_upper_l2(eps, delta, d, k.c);
        });
        return {r, prov(k)};
    };

    auto [t1, p1] = upper(Norm::Linf, kinf);
    rows.push_back(bound_row(t1, p1, Norm::Linf));
    BoundResult t2 = guarded("theorem2", kinf, eps, delta, d, [&] { return theorem2_lower_linf_max(eps, delta, kinf.c); });
    rows.push_back(bound_row(t2, prov(kinf), Norm::Linf));
    auto [t3, p3] = upper(Norm::L2, kl2);
    rows.push_back(bound_row(t3, p3, Norm::L2));
    BoundResult t4 = guarded("theorem4", kl2, eps, delta, d,
                             [&] { return theorem4_lower_l2(eps, delta, kl2.c, kl2.c.sigma_max); });
    rows.push_back(bound_row(t4, prov(kl2), Norm::L2));

    auto corollary = [&](const char *id, double v, const std::string &why) {
        BoundResult r;
        r.id = id;
        r.value = v;
        r.applicable = std::isfinite(v);
        r.reason = why;
        r.epsilon = eps;
        r.delta = delta;
        r.d = d;
        return r;
    };
    const Coeffs &k = norm == Norm::Linf ? kinf : kl2;
    double sig2 = k.ok ? k.c.sigma * k.c.sigma : kNaN;
    std::string why = k.ok ? "eps -> 0 limit" : k.error;
    std::string cprov = k.ok ? "exact inverse FIM" : "none";
    if (norm == Norm::Linf) {
        rows.push_back(bound_row(corollary("corollary1", k.ok ? corollary1_upper(eps, delta, d, sig2) : kNaN, why), cprov, norm));
        rows.push_back(bound_row(corollary("corollary2", k.ok ? corollary2_lower(eps, delta, sig2) : kNaN, why), cprov, norm));
    } else {
        rows.push_back(bound_row(corollary("corollary3", k.ok ? corollary3_upper(eps, delta, d, sig2) : kNaN, why), cprov, norm));
        rows.push_back(
            bound_row(corollary("corollary4", k.ok ? corollary4_lower(eps, delta, k.c.opnorm_inv) : kNaN, why), cprov, norm));
    }
    if (s == Scheme::EntangledPauli || s == Scheme::TwoCopyBell) {
        rows.push_back(bound_row(corollary("entangled-pauli-upper", entangled_pauli_corollary_upper(c.n, eps, delta),
                                           "eps -> 0 limit, any channel"),
                                 "closed form", Norm::Linf));
    } else if (s == Scheme::SeparablePauli) {
        rows.push_back(bound_row(corollary("separable-pauli-lower", separable_pauli_corollary_lower(c.n, eps, delta),
                                           "eps -> 0 limit, depolarizing witness"),
                                 "closed form", Norm::Linf));
    }
    return res;
}

const std::vector<std::string> kSimulateColumns = {"scheme", "n",         "epsilon",   "delta",       "norm",
                                                   "m_star", "rate",      "wilson_lo", "wilson_hi",   "lower_bound",
                                                   "upper_bound", "seed"};

struct BoundPair {
    double lower = kNaN;
    double upper = kNaN;
};

BoundPair sandwich(const StatModel &model, std::span<const double> th, double eps, double delta, Norm norm,
                   double be) {
    BoundPair b;
    Coeffs k = coefficients(model, th, eps, norm, be);
    if (!k.ok) {
        return b;
    }
    int d = model.dim();
    b.lower = norm == Norm::Linf ? corollary2_lower(eps, delta, k.c.sigma * k.c.sigma)
                                 : corollary4_lower(eps, delta, k.c.opnorm_inv);
    try {
        BoundResult up = norm == Norm::Linf ? theorem1_upper_linf(eps, delta, d, k.c) : theorem3_upper_l2(eps, delta, d, k.c);
        b.upper = up.value;
    } catch (const std::invalid_argument &) {
    }
    return b;
}

SearchOptions search_options(const RunConfig &c) {
    SearchOptions o;
    o.trials = c.trials;
    o.seed = c.seed;
    o.m_max = c.m_max;
    o.resolution = c.resolution;
    return o;
}

CommandResult cmd_simulate(const RunConfig &c, std::ostream &err) {
    if (is_pauli(scheme_of(c)) && c.n > kSimulateQubitLimit) {
        throw ConfigError(fmt::format("field 'n': simulate supports n <= {}", kSimulateQubitLimit));
    }
    auto model = build_model(c);
    std::vector<double> th = resolve_theta(c, *model);
    Norm norm = norm_of(c);
    BoundPair b = sandwich(*model, th, c.epsilon, c.delta, norm, c.be_constant);

    CommandResult res;
    res.table.columns = kSimulateColumns;
    MinSamplesResult r;
    try {
        r = find_min_samples(*model, th, c.epsilon, c.delta, norm, search_options(c));
    } catch (const BudgetExceeded &e) {
        err << "simulate: " << e.what() << "\n";
        r = e.partial();
        res.code = kExitBudgetExceeded;
        if (!r.probes.empty()) {
            r.at_m_star = r.probes.back();
        }
        r.m_star = 0;
    }
    for (const std::string &w : r.monotonicity_warnings) {
        err << "simulate: warning: " << w << "\n";
    }
    if (r.hard_violation) {
        err << "simulate: warning: success rate at 2 m_star is significantly below 1 - delta\n";
    }
    res.table.rows.push_back({c.scheme, integer(c.n), num(c.epsilon), num(c.delta), c.norm,
                              integer(static_cast<int64_t>(r.m_star)), num(r.at_m_star.rate),
                              num(r.at_m_star.ci.lo), num(r.at_m_star.ci.hi), num(b.lower), num(b.upper),
                              integer(static_cast<int64_t>(c.seed))});
    return res;
}

const std::vector<std::string> kFisherColumns = {"kind", "coordinate", "value", "closed_form", "abs_diff", "estimable"};

std::vector<double> closed_form_inverse_diag(const StatModel &model, std::span<const double> th) {
    int d = model.dim();
    std::vector<double> cf(d, kNaN);
    switch (model.scheme()) {
    case Scheme::EntangledPauli:
    case Scheme::TwoCopyBell:
        return qfim_inverse_diag_pauli(th);
    case Scheme::SeparablePauli: {
        const auto &sep = static_cast<const SeparablePauliModel &>(model);
        SeparableQfimDiag q = separable_qfim_inverse_diag(sep.probe(), th);
        double k = static_cast<double>(sep.axes().size());
        for (int a = 0; a < d; ++a) {
            cf[a] = k * q.value[a];
        }
        return cf;
    }
    case Scheme::Bernoulli:
        return {th[0] * (1.0 - th[0])};
    case Scheme::Multinomial:
        for (int a = 0; a < d; ++a) {
            cf[a] = th[a] * (1.0 - th[a]);
        }
        return cf;
    case Scheme::GaussianKnownVar: {
        const auto &g = static_cast<const GaussianKnownVarModel &>(model);
        for (int a = 0; a < d; ++a) {
            cf[a] = g.covariance()(a, a);
        }
        return cf;
    }
    case Scheme::Poisson:
        return cf;
    }
    return cf;
}

CommandResult cmd_fisher(const RunConfig &c, std::ostream &err) {
    if (is_pauli(scheme_of(c)) && c.n > kDenseQubitLimit) {
        throw ConfigError(fmt::format("field 'n': fisher supports n <= {}", kDenseQubitLimit));
    }
    auto model = build_model(c);
    std::vector<double> th = resolve_theta(c, *model);
    CommandResult res;
    res.table.columns = kFisherColumns;
    auto &rows = res.table.rows;
    std::optional<FisherMatrix> f;
    try {
        f.emplace(fim(*model, th));
    } catch (const FimUndefined &e) {
        err << "fisher: FIM undefined: " << e.what() << "\n";
        rows.push_back({std::string("fim_undefined"), integer(0), num(kNaN), num(kNaN), num(kNaN), false});
        return res;
    }
    int d = model->dim();
    std::vector<double> cf = closed_form_inverse_diag(*model, th);
    Eigen::VectorXd diag = f->inverse_diagonal();
    for (int a = 0; a < d; ++a) {
        double diff = std::isnan(cf[a]) ? kNaN : std::abs(diag[a] - cf[a]);
        rows.push_back({std::string("inverse_diag"), integer(a + 1), num(diag[a]), num(cf[a]), num(diff),
                        estimable(*f, a)});
    }
    for (int k = 0; k < d; ++k) {
        rows.push_back({std::string("eigenvalue"), integer(k + 1), num(f->eigenvalues()[k]), num(kNaN), num(kNaN),
                        f->full_rank()});
    }
    SpectralStats st = spectral_stats(*f);
    auto stat = [&](const char *kind, double v) {
        rows.push_back({std::string(kind), integer(0), num(v), num(kNaN), num(kNaN), f->full_rank()});
    };
    stat("opnorm_inv", st.opnorm_inv);
    stat("max_inv_diag", st.max_inv_diag);
    stat("max_eig_inv", st.max_eig_inv);
    stat("rank", static_cast<double>(f->rank()));
    stat("excluded_mass", f->excluded_mass());
    return res;
}

const std::vector<std::string> kSeparationColumns = {"n",     "entangled_upper", "separable_lower", "ratio",
                                                     "crossover", "entangled_m_star", "separable_m_star"};

double empirical_m_star(const StatModel &model, std::span<const double> th, const RunConfig &c, std::ostream &err) {
    try {
        return static_cast<double>(find_min_samples(model, th, c.epsilon, c.delta, Norm::Linf, search_options(c)).m_star);
    } catch (const BudgetExceeded &e) {
        err << "separation: " << model.name() << ": " << e.what() << "\n";
        return kNaN;
    }
}

CommandResult cmd_separation(const RunConfig &c, std::ostream &err) {
    if (c.n_min < 1 || c.n_max < c.n_min || c.n_max > kSeparationQubitLimit) {
        throw ConfigError(fmt::format("fields 'n_min'/'n_max': need 1 <= n_min <= n_max <= {}", kSeparationQubitLimit));
    }
    if (c.simulate_n_max < 0 || c.simulate_n_max > kSimulateQubitLimit) {
        throw ConfigError(fmt::format("field 'simulate_n_max': must lie in [0, {}]", kSimulateQubitLimit));
    }
    int n0 = separation_crossover(c.epsilon, c.delta, c.n_max);
    CommandResult res;
    res.table.columns = kSeparationColumns;
    for (int n = c.n_min; n <= c.n_max; ++n) {
        double up = entangled_pauli_corollary_upper(n, c.epsilon, c.delta);
        double lo = separable_pauli_corollary_lower(n, c.epsilon, c.delta);
        double em = kNaN, sm = kNaN;
        if (n <= c.simulate_n_max) {
            RunConfig sub = c;
            sub.n = n;
            sub.probe.clear();
            auto ent = entangled_pauli_model(n);
            std::vector<double> zero(ent->dim(), 0.0);
            em = empirical_m_star(*ent, zero, c, err);
            auto sep = separable_pauli_model(n, resolve_probe(sub));
            sm = empirical_m_star(*sep, zero, c, err);
        }
        res.table.rows.push_back({integer(n), num(up), num(lo), num(lo / up), integer(n0), num(em), num(sm)});
    }
    return res;
}

int cmd_verify(uint64_t seed, bool corrupt, std::ostream &out, std::ostream &err) {
    VerifyOptions opt;
    opt.seed = seed;
    opt.corrupt_fwht = corrupt;
    std::vector<CheckResult> results = run_invariant_suite(opt);
    const CheckResult *first_fail = nullptr;
    size_t passed = 0;
    for (const CheckResult &r : results) {
        out << fmt::format("{:<4} {:<40} {:>8.3f}s", r.passed ? "PASS" : "FAIL", r.name, r.seconds);
        if (!r.passed) {
            out << "  " << r.detail;
            if (!first_fail) {
                first_fail = &r;
            }
        } else {
            ++passed;
        }
        out << "\n";
    }
    out << fmt::format("{}/{} checks passed\n", passed, results.size());
    if (first_fail) {
        err << "verify: first failing check: " << first_fail->name << ": " << first_fail->detail << "\n";
        return kExitVerifyFailed;
    }
    return kExitOk;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return fmt::format("{:.17g}", v);
}

json config_to_json(const RunConfig &c) {
    json j;
    j["command"] = c.command;
    j["scheme"] = c.scheme;
    j["n"] = c.n;
    j["d"] = c.d;
    j["theta_preset"] = c.theta_preset;
    j["theta"] = c.theta;
    j["theta_seed"] = c.theta_seed;
    j["probe_preset"] = c.probe_preset;
    j["probe"] = c.probe;
    j["epsilon"] = c.epsilon;
    j["delta"] = c.delta;
    j["norm"] = c.norm;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["m_max"] = c.m_max;
    j["resolution"] = c.resolution;
    j["be_constant"] = c.be_constant;
    j["grid_size"] = c.grid_size;
    j["truncation"] = c.truncation;
    j["n_min"] = c.n_min;
    j["n_max"] = c.n_max;
    j["simulate_n_max"] = c.simulate_n_max;
    j["format"] = c.format;
    return j;
}

RunConfig config_from_json(const json &j, const std::string &text) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    static const std::vector<std::string> known = {
        "command",   "scheme", "n",      "d",          "theta_preset", "theta",     "theta_seed", "probe_preset",
        "probe",     "epsilon", "delta", "norm",       "trials",       "seed",      "m_max",      "resolution",
        "be_constant", "grid_size", "truncation", "n_min", "n_max",    "simulate_n_max", "out",   "format"};
    for (const auto &[key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(field_error(text, key, "unknown field"));
        }
    }
    RunConfig c;
    read_field(j, text, "command", c.command, "a string");
    read_field(j, text, "scheme", c.scheme, "a string");
    read_field(j, text, "n", c.n, "an integer");
    read_field(j, text, "d", c.d, "an integer");
    read_field(j, text, "theta_preset", c.theta_preset, "a string");
    read_field(j, text, "theta", c.theta, "an array of numbers");
    read_field(j, text, "theta_seed", c.theta_seed, "a nonnegative integer");
    read_field(j, text, "probe_preset", c.probe_preset, "a string");
    read_field(j, text, "probe", c.probe, "an array of [rx, ry, rz]");
    read_field(j, text, "epsilon", c.epsilon, "a number");
    read_field(j, text, "delta", c.delta, "a number");
    read_field(j, text, "norm", c.norm, "a string");
    read_field(j, text, "trials", c.trials, "a nonnegative integer");
    read_field(j, text, "seed", c.seed, "a nonnegative integer");
    read_field(j, text, "m_max", c.m_max, "a nonnegative integer");
    read_field(j, text, "resolution", c.resolution, "a nonnegative integer");
    read_field(j, text, "be_constant", c.be_constant, "a number");
    read_field(j, text, "grid_size", c.grid_size, "an integer");
    read_field(j, text, "truncation", c.truncation, "an integer");
    read_field(j, text, "n_min", c.n_min, "an integer");
    read_field(j, text, "n_max", c.n_max, "an integer");
    read_field(j, text, "simulate_n_max", c.simulate_n_max, "an integer");
    read_field(j, text, "out", c.out, "a string");
    read_field(j, text, "format", c.format, "a string");
    return c;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("{}: cannot open", path));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();

    const std::string csv_tag = "# fisherbound ";
    if (text.rfind(csv_tag, 0) == 0) {
        size_t at = text.find(" config=");
        size_t eol = text.find('\n');
        if (at == std::string::npos || at > eol) {
            throw ConfigError(fmt::format("{}: report header carries no config", path));
        }
        std::string body = text.substr(at + 8, eol == std::string::npos ? std::string::npos : eol - at - 8);
        try {
            return config_from_json(json::parse(body), body);
        } catch (const json::parse_error &e) {
            throw ConfigError(fmt::format("{}: line 1: embedded config: {}", path, e.what()));
        }
    }

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        size_t byte = std::min(e.byte, text.size());
        size_t line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte > 0 ? byte - 1 : 0), '\n');
        size_t bol = byte > 0 ? text.rfind('\n', byte - 1) : std::string::npos;
        size_t col = bol == std::string::npos ? byte : byte - bol - 1;
        throw ConfigError(fmt::format("{}:{}:{}: JSON syntax error", path, line, col));
    }
    if (j.is_array() && !j.empty() && j[0].is_object() && j[0].contains("config")) {
        return config_from_json(j[0]["config"], "");
    }
    try {
        return config_from_json(j, text);
    } catch (const ConfigError &e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
}

void validate(const RunConfig &c) {
    if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end()) {
        throw ConfigError(fmt::format("field 'command': unknown command '{}'", c.command));
    }
    if (c.command == "verify") {
        return;
    }
    Scheme s = scheme_of(c);
    norm_of(c);
    if (c.format != "csv" && c.format != "json") {
        throw ConfigError(fmt::format("field 'format': expected csv or json, got '{}'", c.format));
    }
    if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) {
        throw ConfigError("field 'epsilon': must be a positive finite number");
    }
    if (!(c.delta > 0.0 && c.delta < 1.0)) {
        throw ConfigError("field 'delta': must lie in (0, 1)");
    }
    if (!(c.be_constant > 0.0) || !std::isfinite(c.be_constant)) {
        throw ConfigError("field 'be_constant': must be positive");
    }
    if (c.trials < 1) {
        throw ConfigError("field 'trials': must be at least 1");
    }
    if (c.m_max < 1) {
        throw ConfigError("field 'm_max': must be at least 1");
    }
    if (c.resolution < 1) {
        throw ConfigError("field 'resolution': must be at least 1");
    }
    if (c.grid_size < 0 || c.grid_size > 10000) {
        throw ConfigError("field 'grid_size': must lie in [0, 10000]");
    }
    if (is_pauli(s) && c.command != "separation" && (c.n < 1 || c.n > kDenseQubitLimit)) {
        throw ConfigError(fmt::format("field 'n': must lie in [1, {}]", kDenseQubitLimit));
    }
    if ((s == Scheme::Multinomial || s == Scheme::GaussianKnownVar) && (c.d < 1 || c.d > 64)) {
        throw ConfigError("field 'd': must lie in [1, 64]");
    }
    if (s == Scheme::Poisson && (c.truncation < 1 || c.truncation > 1000)) {
        throw ConfigError("field 'truncation': must lie in [1, 1000]");
    }
}

std::string to_csv(const Table &t, const RunConfig &c) {
    std::string s = fmt::format("# fisherbound {} seed={} config={}\n", FISHERBOUND_VERSION, c.seed,
                                config_to_json(c).dump());
    for (size_t i = 0; i < t.columns.size(); ++i) {
        s += (i ? "," : "") + csv_field(t.columns[i]);
    }
    s += "\n";
    for (const auto &row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            s += (i ? "," : "") + csv_field(cell_text(row[i]));
        }
        s += "\n";
    }
    return s;
}

std::string to_json(const Table &t, const RunConfig &c) {
    json arr = json::array();
    arr.push_back(report_header(c));
    for (const auto &row : t.rows) {
        json o = json::object();
        for (size_t i = 0; i < row.size(); ++i) {
            o[t.columns[i]] = cell_json(row[i]);
        }
        arr.push_back(o);
    }
    return arr.dump(2) + "\n";
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Sample-complexity bounds for maximum-likelihood learning of Pauli channels", "fisherbound"};
    app.set_version_flag("--version", FISHERBOUND_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path, format, norm, scheme, fault;
    uint64_t seed = 0, trials = 0, m_max = 0;
    double epsilon = 0, delta = 0, be = 0;
    int n = 0;
    auto *o_config = app.add_option("--config", config_path, "JSON config, or a previous report");
    auto *o_seed = app.add_option("--seed", seed, "RNG seed");
    auto *o_out = app.add_option("--out", out_path, "Output file (default stdout)");
    auto *o_format = app.add_option("--format", format, "csv or json");
    auto *o_trials = app.add_option("--trials", trials, "Trials per sample-size probe");
    auto *o_eps = app.add_option("--epsilon", epsilon, "Accuracy");
    auto *o_delta = app.add_option("--delta", delta, "Failure probability");
    auto *o_norm = app.add_option("--norm", norm, "linf or l2");
    auto *o_scheme = app.add_option("--scheme", scheme, "Measurement scheme or classical model");
    auto *o_n = app.add_option("--n", n, "Qubits");
    auto *o_be = app.add_option("--be-constant", be, "Berry-Esseen constant");
    auto *o_mmax = app.add_option("--m-max", m_max, "Sample-size budget");
    app.add_option("--inject-fault", fault)->group("");

    std::vector<CLI::App *> subs;
    for (const std::string &cmd : kCommands) {
        subs.push_back(app.add_subcommand(cmd));
    }
    subs[0]->description("Evaluate the finite-eps and limiting bounds");
    subs[1]->description("Search for the empirical minimal sample size");
    subs[2]->description("Fisher information diagnostics");
    subs[3]->description("Entangled vs separable scaling table");
    subs[4]->description("Run the invariant suite");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion &) {
        out << FISHERBOUND_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "fisherbound: " << e.what() << "\n";
        return kExitConfigError;
    }

    std::string command;
    for (CLI::App *s : subs) {
        if (s->parsed()) {
            command = s->get_name();
        }
    }

    RunConfig c;
    try {
        if (o_config->count()) {
            c = load_config(config_path);
        }
        c.command = command;
        if (o_seed->count()) c.seed = seed;
        if (o_out->count()) c.out = out_path;
        if (o_format->count()) c.format = format;
        if (o_trials->count()) c.trials = trials;
        if (o_eps->count()) c.epsilon = epsilon;
        if (o_delta->count()) c.delta = delta;
        if (o_norm->count()) c.norm = norm;
        if (o_scheme->count()) c.scheme = scheme;
        if (o_n->count()) c.n = n;
        if (o_be->count()) c.be_constant = be;
        if (o_mmax->count()) c.m_max = m_max;
        if (!fault.empty() && fault != "fwht") {
            throw ConfigError(fmt::format("--inject-fault: unknown fault '{}'", fault));
        }
        validate(c);
    } catch (const ConfigError &e) {
        err << "fisherbound: config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    if (command == "verify") {
        return cmd_verify(c.seed, fault == "fwht", out, err);
    }

    CommandResult res;
    try {
        if (command == "bounds") {
            res = cmd_bounds(c);
        } else if (command == "simulate") {
            res = cmd_simulate(c, err);
        } else if (command == "fisher") {
            res = cmd_fisher(c, err);
        } else {
            res = cmd_separation(c, err);
        }
    } catch (const ConfigError &e) {
        err << "fisherbound: config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::domain_error &e) {
        err << "fisherbound: config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument &e) {
        err << "fisherbound: config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    std::string text = c.format == "json" ? to_json(res.table, c) : to_csv(res.table, c);
    if (c.out.empty()) {
        out << text;
    } else {
        std::ofstream f(c.out, std::ios::binary);
        if (!f) {
            err << "fisherbound: cannot write " << c.out << "\n";
            return kExitConfigError;
        }
        f << text;
    }
    return res.code;
}

int run(int argc, char **argv, std::ostream &out, std::ostream &err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, out, err);
}

}  // namespace fisherbound::cli
