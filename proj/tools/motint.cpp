#include "motint/measure.hpp"
#include "motint/motive.hpp"
#include "motint/series.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

using namespace motint;
using json = nlohmann::ordered_json;

namespace {

enum Exit { OK = 0, CHECK_FAILED = 1, USAGE = 2, BUDGET = 3 };

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---- argument helpers ----

std::uint32_t to_u32(const std::string& s) {
    std::size_t pos = 0;
    unsigned long v = std::stoul(s, &pos);
    if (pos != s.size()) throw UsageError("not a number: " + s);
    return static_cast<std::uint32_t>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        auto a = cur.find_first_not_of(" \t"), b = cur.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
    }
    return out;
}

/// "3..50" (every prime in the range) or "3,5,7".
std::vector<std::uint32_t> parse_primes(const std::string& s) {
    std::vector<std::uint32_t> out;
    auto dots = s.find("..");
    if (dots != std::string::npos) {
        out = primes_in(to_u32(s.substr(0, dots)), to_u32(s.substr(dots + 2)));
    } else {
        for (auto& t : split(s, ',')) {
            std::uint32_t p = to_u32(t);
            if (!is_prime(p)) throw UsageError(t + " is not prime");
            out.push_back(p);
        }
    }
    if (out.empty()) throw UsageError("no primes in '" + s + "'");
    return out;
}

/// "0..3" or "1,2,4"; strictly increasing.
std::vector<int> parse_levels(const std::string& s) {
    std::vector<int> out;
    auto dots = s.find("..");
    if (dots != std::string::npos) {
        int a = std::stoi(s.substr(0, dots)), b = std::stoi(s.substr(dots + 2));
        for (int n = a; n <= b; ++n) out.push_back(n);
    } else {
        for (auto& t : split(s, ',')) out.push_back(std::stoi(t));
    }
    if (out.empty()) throw UsageError("empty schedule '" + s + "'");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1]) throw UsageError("schedule must be strictly increasing");
    if (out.front() < 0) throw UsageError("levels must be >= 0");
    return out;
}

/// A path as given, else relative to the shipped data directory.
std::string resolve(const std::string& path, const std::string& sub) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    for (const std::string& d : {std::string(MOTINT_DATA_DIR) + "/" + sub, std::string(MOTINT_DATA_DIR)}) {
        fs::path c = fs::path(d) / path;
        if (fs::exists(c)) return c.string();
    }
    throw UsageError("cannot open " + path);
}

struct FormulaInput {
    std::string text;
    FormulaPtr f;
    RingRegistry rings;
    std::vector<std::pair<std::string, Sort>> free;
};

/// Inline formula text, or a formula file (".pas" or an existing path).
FormulaInput load_formula(const std::string& arg) {
    FormulaInput in;
    bool file = arg.size() > 4 && arg.substr(arg.size() - 4) == ".pas";
    if (file || std::filesystem::exists(arg)) {
        auto ff = load_formula_file(resolve(arg, "formulas"));
        in.f = ff.formula;
        in.rings = ff.rings;
        in.free = free_vars(in.f);
    } else {
        in.f = parse(arg);
        in.free = free_vars(in.f);
        SortEnv env(in.free.begin(), in.free.end());
        in.f = check_sorts(in.f, env);
    }
    in.text = render(in.f);
    return in;
}

BackendSpec backend(const std::string& kind, std::uint32_t p) {
    if (!is_prime(p)) throw UsageError(std::to_string(p) + " is not prime");
    if (kind == "padic") return BackendSpec::padic(p);
    if (kind == "series") return BackendSpec::power_series(p);
    throw UsageError("backend must be padic or series");
}

// ---- output ----

void text_out(std::ostream& os, const json& j, const std::string& indent = "") {
    if (j.is_object()) {
        for (auto& [k, v] : j.items()) {
            if (v.is_structured()) {
                os << indent << k << ":\n";
                text_out(os, v, indent + "  ");
            } else {
                os << indent << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
            }
        }
    } else if (j.is_array()) {
        bool flat = std::none_of(j.begin(), j.end(), [](const json& x) { return x.is_structured(); });
        if (flat) {
            std::string line;
            for (auto& v : j) line += (line.empty() ? "" : ", ") + (v.is_string() ? v.get<std::string>() : v.dump());
            os << indent << line << "\n";
        } else {
            for (auto& v : j) {
                os << indent << "-\n";
                text_out(os, v, indent + "  ");
            }
        }
    } else {
        os << indent << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
    }
}

struct Output {
    std::string format = "json";
    std::string path;

    void emit(const json& j, const std::string& csv = "") const {
        std::ostringstream os;
        if (format == "json") os << j.dump(2) << "\n";
        else if (format == "text") text_out(os, j);
        else if (format == "csv") {
            if (csv.empty()) throw UsageError("csv output is not available for this command");
            os << csv;
        } else throw UsageError("format must be json, text or csv");
        if (path.empty()) {
            std::cout << os.str();
        } else {
            std::ofstream f(path);
            if (!f) throw std::runtime_error("cannot write " + path);
            f << os.str();
        }
    }
};

std::string levels_csv(const MeasureResult& m) {
    std::string s = "n,lo,hi\n";
    for (auto& l : m.history) s += std::to_string(l.n) + "," + to_string(l.lo) + "," + to_string(l.hi) + "\n";
    return s;
}

// ---- random elements for selftest ----

MotiveElem random_motive(std::mt19937& rng) {
    std::uniform_int_distribution<int> c(-4, 4), deg(0, 3), k(0, 2), d(1, 4), e(0, 1);
    std::vector<Rational> co;
    for (int i = deg(rng); i >= 0; --i) co.push_back(Rational(c(rng)));
    std::map<int, int> den;
    for (int i = 0; i < 2; ++i)
        if (e(rng)) den[d(rng)] += 1;
    return MotiveElem::make(QPoly(co), k(rng), den);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact p-adic and motivic integration at desk scale"};
    app.require_subcommand(1);
    app.fallthrough();
    Output out;
    std::uint64_t budget = 0;
    unsigned threads = 0;
    app.add_option("--format", out.format, "json, text or csv")->capture_default_str();
    app.add_option("-o,--out", out.path, "write the report to a file");
    app.add_option("--budget", budget, "enumeration budget (overrides MOTINT_BUDGET)");
    app.add_option("--threads", threads, "worker threads (0: all cores)");

    std::string formula, variety, backend_kind = "padic", assign_str, levels_str = "0..3", primes_str, vars_str;
    std::uint32_t prime = 3;
    int precision = 1, n = 0, nmax = 4, B = -1;

    auto add_backend = [&](CLI::App* c) {
        c->add_option("-p,--prime", prime, "residue characteristic")->capture_default_str();
        c->add_option("--backend", backend_kind, "padic (Z_p) or series (F_p[[t]])")->capture_default_str();
    };

    auto* c_parse = app.add_subcommand("parse", "parse and sort-check a formula");
    c_parse->add_option("formula", formula, "formula text or .pas file")->required();

    auto* c_eval = app.add_subcommand("eval", "evaluate a formula at finite precision");
    c_eval->add_option("formula", formula)->required();
    add_backend(c_eval);
    c_eval->add_option("-N,--precision", precision)->capture_default_str();
    c_eval->add_option("--assign", assign_str, "x=5,n=2 (vr values are read mod p^N)");
    std::string schedule_str;
    c_eval->add_option("--schedule", schedule_str, "stabilize a sentence over these precisions, e.g. 1..3");

    auto* c_count = app.add_subcommand("count", "classify balls of radius N against a formula");
    c_count->add_option("formula", formula)->required();
    add_backend(c_count);
    c_count->add_option("-N,--precision", precision)->capture_default_str();

    bool list = false;
    int lift_B = -1;
    auto* c_jets = app.add_subcommand("jets", "count (and list) points of X modulo pi^{n+1}");
    c_jets->add_option("--variety", variety)->required();
    add_backend(c_jets);
    c_jets->add_option("-n", n)->capture_default_str();
    c_jets->add_flag("--list", list, "list the jets (at most 1000)");
    c_jets->add_option("--lift", lift_B, "with --list: certify liftability with depth budget B");

    bool per_jet = false;
    auto* c_image = app.add_subcommand("image", "N_{p,n}: jets that lift to X(Z_p)");
    c_image->add_option("--variety", variety)->required();
    add_backend(c_image);
    c_image->add_option("-n", n)->capture_default_str();
    c_image->add_option("-B,--depth", B, "lifting depth budget (default n+4)");
    c_image->add_flag("--per-jet", per_jet, "classify every jet separately");

    bool fit = false;
    auto* c_series = app.add_subcommand("series", "Poincare series coefficients");
    c_series->add_option("--variety", variety)->required();
    add_backend(c_series);
    c_series->add_option("--nmax", nmax)->capture_default_str();
    c_series->add_option("-B,--depth", B, "lifting depth budget (default n+4)");
    c_series->add_flag("--fit", fit, "fit a rational function");

    std::string coeffs_str;
    int dim = 1;
    auto* c_fit = app.add_subcommand("fit", "fit a rational function to coefficients");
    c_fit->add_option("--coeffs", coeffs_str, "comma separated integers")->required();
    c_fit->add_option("-p,--prime", prime)->required();
    c_fit->add_option("--dim", dim)->capture_default_str();

    std::string holdout_str, class_str;
    auto* c_cross = app.add_subcommand("crossfit", "interpolate N_{p,n} as a polynomial in p");
    c_cross->add_option("--variety", variety)->required();
    c_cross->add_option("-n", n)->capture_default_str();
    c_cross->add_option("--fit-primes", primes_str)->required();
    c_cross->add_option("--holdout", holdout_str)->required();
    c_cross->add_option("--class", class_str, "restrict to p = a mod m, written m:a");

    std::string expr;
    auto* c_motive = app.add_subcommand("motive", "normal form and specializations of a class");
    c_motive->add_option("expr", expr, "e.g. '(L^2 - 1)/(L - 1)'")->required();
    c_motive->add_option("--primes", primes_str, "numeric specializations");

    std::string catalog;
    bool verify = false;
    auto* c_cover = app.add_subcommand("cover", "chi_c of decomposition-group formulas on cyclic covers");
    c_cover->add_option("--catalog", catalog)->required();
    c_cover->add_flag("--verify", verify, "check the recursion against point counts");
    c_cover->add_option("--primes", primes_str, "primes to check (good primes are kept)");

    auto* c_measure = app.add_subcommand("measure", "measure of a definable subset of O^d");
    c_measure->add_option("formula", formula)->required();
    add_backend(c_measure);
    c_measure->add_option("--levels", levels_str)->capture_default_str();
    c_measure->add_option("--vars", vars_str, "coordinates, e.g. x,y");

    std::string poly_str;
    auto* c_integral = app.add_subcommand("integral", "integral of |f| over O^d");
    c_integral->add_option("poly", poly_str)->required();
    add_backend(c_integral);
    c_integral->add_option("--levels", levels_str)->capture_default_str();
    c_integral->add_option("--vars", vars_str);

    std::string map_path;
    auto* c_cov = app.add_subcommand("cov-check", "change of variables along a chart map");
    c_cov->add_option("--map", map_path)->required();
    c_cov->add_option("formula", formula, "subset of the target")->required();
    add_backend(c_cov);
    c_cov->add_option("-N,--precision", precision)->capture_default_str();

    std::string corpus;
    auto* c_ake = app.add_subcommand("ake", "compare sentences over Z_p and F_p[[t]]");
    c_ake->add_option("--formula", formula);
    c_ake->add_option("--corpus", corpus);
    c_ake->add_option("--primes", primes_str)->required();
    c_ake->add_option("--levels", levels_str, "precisions")->capture_default_str();

    unsigned seed = 1;
    int rounds = 1000;
    auto* c_self = app.add_subcommand("selftest", "randomized identity checks");
    c_self->add_option("--seed", seed)->capture_default_str();
    c_self->add_option("--rounds", rounds)->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    if (budget > 0) setenv("MOTINT_BUDGET", std::to_string(budget).c_str(), 1);
    ArcsConfig acfg;
    acfg.threads = threads;
    EvalConfig ecfg;
    ecfg.threads = threads;

    try {
        if (c_parse->parsed()) {
            auto in = load_formula(formula);
            json j;
            j["formula"] = in.text;
            json fv = json::array();
            for (auto& [v, s] : in.free) fv.push_back({{"name", v}, {"sort", sort_name(s)}});
            j["free"] = fv;
            json rings = json::array();
            for (auto& [name, def] : in.rings) rings.push_back(name);
            j["rings"] = rings;
            out.emit(j);
            return OK;
        }
        if (c_eval->parsed()) {
            auto in = load_formula(formula);
            auto b = backend(backend_kind, prime);
            json j;
            j["formula"] = in.text;
            j["backend"] = b.name();
            if (!schedule_str.empty()) {
                if (!in.free.empty()) throw UsageError("--schedule needs a sentence");
                auto r = stabilize_sentence(in.f, b, parse_levels(schedule_str), &in.rings, ecfg);
                json h = json::array();
                for (auto& [N, t] : r.history) h.push_back({{"N", N}, {"verdict", tri_name(t)}});
                j["history"] = h;
                j["verdict"] = tri_name(r.verdict);
                out.emit(j);
                return OK;
            }
            Assignment a;
            std::map<std::string, Sort> sorts(in.free.begin(), in.free.end());
            for (auto& kv : split(assign_str, ',')) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw UsageError("--assign expects name=value");
                std::string v = kv.substr(0, eq);
                std::string val = kv.substr(eq + 1);
                auto it = sorts.find(v);
                if (it == sorts.end()) throw UsageError(v + " is not free in the formula");
                if (it->second == Sort::VAL_RING) a[v] = vr_value(make_truncated(b, Integer(val), precision));
                else if (it->second == Sort::VAL_GROUP) a[v] = std::stol(val);
                else a[v] = ResidueElement{static_cast<std::uint32_t>(std::stoul(val) % prime)};
            }
            for (auto& [v, s] : in.free)
                if (!a.count(v)) throw UsageError("no value for " + v);
            EvalConfig cfg = ecfg;
            cfg.N = precision;
            j["precision"] = precision;
            j["verdict"] = tri_name(eval_at_level(in.f, b, cfg, a, &in.rings));
            out.emit(j);
            return OK;
        }
        if (c_count->parsed()) {
            auto in = load_formula(formula);
            auto b = backend(backend_kind, prime);
            EvalConfig cfg = ecfg;
            cfg.N = precision;
            auto r = count_satisfying(in.f, b, cfg, &in.rings);
            json j;
            j["formula"] = in.text;
            j["backend"] = b.name();
            j["precision"] = precision;
            j["certain_true"] = to_string(r.certain_true);
            j["unknown"] = to_string(r.unknown);
            j["certain_false"] = to_string(r.certain_false);
            out.emit(j);
            return OK;
        }
        if (c_jets->parsed()) {
            auto X = load_variety(resolve(variety, "varieties"));
            auto b = backend(backend_kind, prime);
            json j;
            j["variety"] = X.name;
            j["backend"] = b.name();
            j["n"] = n;
            j["count"] = to_string(jet_count(X, b, n, acfg));
            if (list) {
                auto jets = enumerate_jets(X, b, n, acfg);
                if (jets.size() > 1000) throw UsageError("more than 1000 jets; drop --list");
                json arr = json::array();
                for (auto& pt : jets) {
                    json e;
                    json co = json::array();
                    for (auto& c : pt.coords) co.push_back(c.str());
                    e["coords"] = co;
                    if (lift_B >= 0) {
                        auto st = lift_certificate(X, b, pt, lift_B, acfg);
                        e["status"] = lift_kind_name(st.kind);
                        e["depth"] = st.depth;
                        if (st.kind != LiftStatus::Kind::UNKNOWN) e["checked"] = check_lift_certificate(X, b, pt, st);
                    }
                    arr.push_back(e);
                }
                j["jets"] = arr;
            }
            out.emit(j);
            return OK;
        }
        if (c_image->parsed()) {
            auto X = load_variety(resolve(variety, "varieties"));
            auto b = backend(backend_kind, prime);
            int depth = B < 0 ? n + 4 : B;
            auto r = per_jet ? image_count_per_jet(X, b, n, depth, acfg) : image_count(X, b, n, depth, acfg);
            json j;
            j["variety"] = X.name;
            j["backend"] = b.name();
            j["n"] = n;
            j["depth"] = depth;
            j["lo"] = to_string(r.lo);
            j["hi"] = to_string(r.hi);
            j["status"] = r.status();
            j["unknown_jets"] = r.unknown_jets;
            out.emit(j);
            return OK;
        }
        if (c_series->parsed()) {
            auto X = load_variety(resolve(variety, "varieties"));
            auto b = backend(backend_kind, prime);
            auto s = poincare_coeffs(X, b, nmax, B, acfg);
            std::optional<RationalFit> rf;
            std::string fit_error;
            if (fit) {
                try {
                    rf = fit_rational(s);
                } catch (const NoFitInGrid& e) {
                    fit_error = e.what();
                } catch (const IntervalCoefficientsPresent& e) {
                    fit_error = e.what();
                }
            }
            json j = series_json(s, rf);
            if (!fit_error.empty()) j["fit_error"] = fit_error;
            out.emit(j, series_csv(s));
            return OK;
        }
        if (c_fit->parsed()) {
            std::vector<Integer> cs;
            for (auto& t : split(coeffs_str, ',')) cs.push_back(Integer(t));
            auto r = fit_rational(cs, prime, dim);
            json j;
            j["prime"] = prime;
            json num = json::array();
            for (auto& c : r.numerator) num.push_back(to_string(c));
            j["numerator"] = num;
            json fs = json::array();
            for (auto& [a, e] : r.factors) fs.push_back({a, e});
            j["factors"] = fs;
            j["fitted"] = r.fitted;
            j["holdouts"] = r.holdouts;
            j["holdout_ok"] = r.holdout_ok;
            j["rendered"] = r.str();
            out.emit(j);
            return r.holdout_ok ? OK : CHECK_FAILED;
        }
        if (c_cross->parsed()) {
            auto X = load_variety(resolve(variety, "varieties"));
            std::optional<std::pair<std::uint32_t, std::uint32_t>> cls;
            if (!class_str.empty()) {
                auto parts = split(class_str, ':');
                if (parts.size() != 2) throw UsageError("--class expects m:a");
                cls = std::make_pair(to_u32(parts[0]), to_u32(parts[1]));
            }
            auto r = cross_prime_fit(X, n, parse_primes(primes_str), parse_primes(holdout_str), cls, -1, acfg);
            json j;
            j["variety"] = X.name;
            j["n"] = n;
            j["status"] = r.status == CrossPrimeFit::Status::POLYNOMIAL ? "POLYNOMIAL" : "NON_POLYNOMIAL";
            j["polynomial"] = r.poly.empty() ? json(nullptr) : json(r.poly_str());
            auto checks = [](const std::vector<CrossPrimeFit::Check>& cs) {
                json a = json::array();
                for (auto& c : cs)
                    a.push_back({{"p", c.p}, {"value", to_string(c.value)}, {"predicted", to_string(c.predicted)},
                                 {"ok", c.ok}});
                return a;
            };
            j["fit"] = checks(r.fit);
            j["holdout"] = checks(r.holdout);
            out.emit(j);
            return r.status == CrossPrimeFit::Status::POLYNOMIAL ? OK : CHECK_FAILED;
        }
        if (c_motive->parsed()) {
            auto e = parse_motive(expr);
            json j;
            j["input"] = expr;
            j["normal_form"] = e.str();
            if (!primes_str.empty()) {
                json num = json::object();
                for (auto p : parse_primes(primes_str)) {
                    try {
                        num[std::to_string(p)] = to_string(specialize_numeric(e, p));
                    } catch (const std::domain_error& err) {
                        num[std::to_string(p)] = nullptr;
                    }
                }
                j["numeric"] = num;
            }
            try {
                j["euler"] = to_string(specialize_euler(e));
            } catch (const PoleAtOne&) {
                j["euler"] = nullptr;
            }
            j["hodge"] = specialize_hodge(e).str();
            out.emit(j);
            return OK;
        }
        if (c_cover->parsed()) {
            auto covers = load_cover_catalog(resolve(catalog, "covers"));
            bool all_ok = true;
            json arr = json::array();
            std::vector<std::uint32_t> ps = primes_str.empty() ? std::vector<std::uint32_t>{} : parse_primes(primes_str);
            if (verify && ps.empty()) throw UsageError("--verify needs --primes");
            for (auto& cov : covers) {
                json c;
                c["cover"] = cov.name;
                c["m"] = cov.m;
                json terms = json::object();
                MotiveElem total;
                for (int C : cov.subgroups()) {
                    MotiveElem chi = chi_c_cover(cov, C);
                    total = total + chi;
                    terms[std::to_string(C)] = chi.str();
                }
                c["chi_c"] = terms;
                bool part = total == cov.X;
                c["partition_identity"] = part;
                all_ok = all_ok && part;
                if (verify) {
                    json rows = json::array();
                    for (auto p : ps) {
                        if (!good_prime(cov, p)) continue;
                        for (int C : cov.subgroups()) {
                            auto r = verify_recursion(cov, C, p);
                            rows.push_back({{"p", p},
                                            {"order", C},
                                            {"lhs", to_string(r.lhs)},
                                            {"rhs", to_string(r.rhs)},
                                            {"chi_value", to_string(r.chi_value)},
                                            {"decomposition", to_string(r.decomposition)},
                                            {"partition_sum", to_string(r.partition_sum)},
                                            {"x_points", to_string(r.x_points)},
                                            {"ok", r.ok}});
                            all_ok = all_ok && r.ok;
                        }
                    }
                    c["checks"] = rows;
                }
                arr.push_back(c);
            }
            json j;
            j["covers"] = arr;
            j["all_ok"] = all_ok;
            out.emit(j);
            return all_ok ? OK : CHECK_FAILED;
        }
        if (c_measure->parsed()) {
            auto in = load_formula(formula);
            auto b = backend(backend_kind, prime);
            auto r = set_measure(in.f, b, parse_levels(levels_str), &in.rings, split(vars_str, ','), ecfg);
            json j = measure_json(in.text, b, r);
            out.emit(j, levels_csv(r));
            return OK;
        }
        if (c_integral->parsed()) {
            Poly f = parse_poly(poly_str);
            auto b = backend(backend_kind, prime);
            auto r = integral_abs(f, b, parse_levels(levels_str), split(vars_str, ','));
            json j = measure_json("|" + f.str() + "|", b, r);
            out.emit(j, levels_csv(r));
            return OK;
        }
        if (c_cov->parsed()) {
            auto map = parse_birational_map(read_file(resolve(map_path, "maps")));
            auto in = load_formula(formula);
            auto b = backend(backend_kind, prime);
            json j;
            j["formula"] = in.text;
            j["backend"] = b.name();
            j["precision"] = precision;
            j["jacobian"] = map.jacobian.str();
            j["order"] = map.e;
            try {
                auto r = change_of_variables_check(map, in.f, b, precision, &in.rings);
                j["target"] = measure_json(in.text, b, r.target);
                j["source"] = measure_json("preimage", b, r.source);
                j["scaled_source"] = r.source.stabilized ? json(to_string(r.scaled_source)) : json(nullptr);
                j["ok"] = r.ok;
                out.emit(j);
                return r.ok ? OK : CHECK_FAILED;
            } catch (const NonConstantJacobianOrder& e) {
                json w = json::array();
                for (auto& x : e.witness) w.push_back(x.str());
                j["ok"] = false;
                j["error"] = e.what();
                j["witness"] = w;
                j["witness_radius"] = e.radius;
                out.emit(j);
                return CHECK_FAILED;
            }
        }
        if (c_ake->parsed()) {
            if (formula.empty() == corpus.empty()) throw UsageError("give exactly one of --formula, --corpus");
            Corpus cs;
            if (!corpus.empty()) {
                cs = parse_corpus(read_file(resolve(corpus, "formulas")));
            } else {
                auto in = load_formula(formula);
                if (!in.free.empty()) throw UsageError("ake needs a sentence");
                cs.rings = in.rings;
                cs.sentences.push_back(in.f);
                cs.sources.push_back(in.text);
            }
            auto ps = parse_primes(primes_str);
            auto sched = parse_levels(levels_str);
            if (sched.front() < 1) throw UsageError("ake precisions start at 1");
            json arr = json::array();
            int dis = 0, und = 0;
            for (std::size_t i = 0; i < cs.sentences.size(); ++i) {
                auto rep = ake_compare(cs.sentences[i], ps, sched, &cs.rings);
                json rows = json::array();
                for (auto& r : rep.rows) {
                    const char* st = r.status == AkeRow::Status::AGREE      ? "AGREE"
                                     : r.status == AkeRow::Status::DISAGREE ? "DISAGREE"
                                                                             : "UNDECIDED";
                    rows.push_back({{"p", r.p}, {"padic", tri_name(r.padic)}, {"series", tri_name(r.power_series)},
                                    {"status", st}});
                }
                arr.push_back({{"sentence", cs.sources[i]},
                               {"agreements", rep.agreements},
                               {"disagreements", rep.disagreements},
                               {"undecided", rep.undecided},
                               {"rows", rows}});
                dis += rep.disagreements;
                und += rep.undecided;
            }
            json j;
            j["sentences"] = arr;
            j["disagreements"] = dis;
            j["undecided"] = und;
            out.emit(j);
            return dis == 0 ? OK : CHECK_FAILED;
        }
        if (c_self->parsed()) {
            std::mt19937 rng(seed);
            int fails = 0, checks = 0;
            auto check = [&](bool ok) {
                ++checks;
                fails += !ok;
            };
            std::uniform_int_distribution<int> pick(0, 4);
            const std::uint32_t primes[] = {2, 3, 5, 7, 11};
            for (int i = 0; i < rounds; ++i) {
                MotiveElem a = random_motive(rng), b = random_motive(rng), c = random_motive(rng);
                check((a + b) * c == a * c + b * c);
                check((a * b) * c == a * (b * c));
                check(a - a == MotiveElem());
                std::uint32_t p = primes[pick(rng)];
                check(specialize_numeric(a * b + c, p) ==
                      specialize_numeric(a, p) * specialize_numeric(b, p) + specialize_numeric(c, p));
            }
            std::uniform_int_distribution<int> k(0, 2), r(0, 2);
            for (int i = 0; i < rounds / 4; ++i) {
                auto b = BackendSpec::padic(primes[pick(rng) % 3]);
                std::string s1 = "ord(x + " + std::to_string(r(rng)) + "*y) >= " + std::to_string(k(rng));
                std::string s2 = "ord(x*y - " + std::to_string(r(rng)) + ") = " + std::to_string(k(rng) % 2);
                auto m = [&](const std::string& s) {
                    auto res = set_measure(parse(s), b, {0, 1, 2}, nullptr, {"x", "y"});
                    return res.stabilized ? res.lo : Rational(-1);
                };
                Rational a = m(s1), c = m(s2), u = m("(" + s1 + ") | (" + s2 + ")"), n2 = m("(" + s1 + ") & (" + s2 + ")");
                check(a >= 0 && c >= 0 && u == a + c - n2);
            }
            json j;
            j["seed"] = seed;
            j["checks"] = checks;
            j["failures"] = fails;
            out.emit(j);
            return fails == 0 ? OK : CHECK_FAILED;
        }
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return BUDGET;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return USAGE;
    } catch (const SortError& e) {
        std::cerr << "sort error: " << e.what() << "\n";
        return USAGE;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return USAGE;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return CHECK_FAILED;
    }
    return OK;
}
