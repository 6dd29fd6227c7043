#include "nfde/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nfde/errors.hpp"

namespace nfde {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Walks one JSON object, records every value it hands out (defaults
// included) into the echo, and reports errors with their location.
class Reader {
  public:
    Reader(const json& in, ojson& out, std::string where) : in_(&in), out_(&out), where_(std::move(where)) {
        if (!in_->is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where_ + ": " + what); }
    std::string at(const std::string& key) const { return where_ + "/" + key; }

    bool has(const std::string& key) const { return in_->contains(key) && !(*in_)[key].is_null(); }
    const json& raw(const std::string& key) const {
        if (!has(key)) throw ConfigError(at(key) + ": missing");
        return (*in_)[key];
    }

    double number(const std::string& key, std::optional<double> def = std::nullopt) {
        if (!has(key)) {
            if (!def) throw ConfigError(at(key) + ": missing");
            (*out_)[key] = *def;
            return *def;
        }
        const json& v = (*in_)[key];
        if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(at(key) + ": not finite");
        (*out_)[key] = x;
        return x;
    }

    int integer(const std::string& key, std::optional<int> def = std::nullopt) {
        if (!has(key)) {
            if (!def) throw ConfigError(at(key) + ": missing");
            (*out_)[key] = *def;
            return *def;
        }
        const json& v = (*in_)[key];
        if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
        const int x = v.get<int>();
        (*out_)[key] = x;
        return x;
    }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) {
            (*out_)[key] = def;
            return def;
        }
        const json& v = (*in_)[key];
        if (!v.is_boolean()) throw ConfigError(at(key) + ": expected true or false");
        (*out_)[key] = v.get<bool>();
        return v.get<bool>();
    }

    std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
        if (!has(key)) {
            if (!def) throw ConfigError(at(key) + ": missing");
            (*out_)[key] = *def;
            return *def;
        }
        const json& v = (*in_)[key];
        if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
        (*out_)[key] = v.get<std::string>();
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
        if (!has(key)) {
            if (!def) throw ConfigError(at(key) + ": missing");
            (*out_)[key] = *def;
            return *def;
        }
        const json& v = (*in_)[key];
        if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of numbers");
        std::vector<double> xs;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(at(key) + ": expected an array of numbers");
            xs.push_back(e.get<double>());
        }
        (*out_)[key] = xs;
        return xs;
    }

    /// Copies a value to the echo untouched and returns it.
    const json& verbatim(const std::string& key) {
        const json& v = raw(key);
        (*out_)[key] = ojson::parse(v.dump());
        return v;
    }

    Reader child(const std::string& key, bool create_if_missing = true) {
        static const json empty = json::object();
        (*out_)[key] = ojson::object();
        if (!has(key)) {
            if (!create_if_missing) throw ConfigError(at(key) + ": missing");
            return Reader(empty, (*out_)[key], at(key));
        }
        return Reader((*in_)[key], (*out_)[key], at(key));
    }

    void reject_unknown(std::initializer_list<const char*> known) const {
        for (const auto& [k, v] : in_->items()) {
            bool ok = false;
            for (const char* name : known) ok = ok || k == name;
            if (!ok) fail("unknown key '" + k + "'");
        }
    }

    const std::string& where() const { return where_; }

  private:
    const json* in_;
    ojson* out_;
    std::string where_;
};

TrigPoly parse_trig_at(const json& j, std::size_t dim, const std::string& where) {
    if (j.is_number()) return TrigPoly(j.get<double>());
    if (!j.is_object()) throw ConfigError(where + ": expected a number or {constant, terms}");
    double c = 0.0;
    if (j.contains("constant")) {
        if (!j["constant"].is_number()) throw ConfigError(where + "/constant: expected a number");
        c = j["constant"].get<double>();
    }
    std::vector<TrigTerm> terms;
    if (j.contains("terms")) {
        if (!j["terms"].is_array()) throw ConfigError(where + "/terms: expected an array");
        for (const auto& t : j["terms"]) {
            TrigTerm term;
            if (!t.is_object() || !t.contains("k") || !t["k"].is_array()) {
                throw ConfigError(where + "/terms: each term needs an integer vector k");
            }
            for (const auto& k : t["k"]) {
                if (!k.is_number_integer()) throw ConfigError(where + "/terms/k: expected integers");
                term.k.push_back(k.get<int>());
            }
            if (term.k.size() != dim) throw ConfigError(where + "/terms/k: length must equal the torus dimension");
            term.cos_coeff = t.value("cos", 0.0);
            term.sin_coeff = t.value("sin", 0.0);
            terms.push_back(std::move(term));
        }
    }
    return TrigPoly(c, std::move(terms));
}

std::optional<TransportSpec> parse_transport(const json& j, std::size_t dim, const std::string& where) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_object() || !j.contains("gain")) throw ConfigError(where + ": expected null or {gain, shape}");
    TransportSpec t{parse_trig_at(j["gain"], dim, where + "/gain"), ShapeFn{}};
    if (j.contains("shape")) {
        const json& s = j["shape"];
        if (s == "identity") {
            t.shape = IdentityShape{};
        } else if (s == "saturate") {
            t.shape = SaturateShape{};
        } else if (s.is_object() && s.contains("sine_bend") && s["sine_bend"].is_number()) {
            const double eps = s["sine_bend"].get<double>();
            if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError(where + "/shape/sine_bend: must lie in [0, 1)");
            t.shape = SineBendShape{eps};
        } else {
            throw ConfigError(where + "/shape: expected \"identity\", \"saturate\" or {\"sine_bend\": eps}");
        }
    }
    return t;
}

std::vector<std::vector<std::optional<TransportSpec>>> parse_transports(const json& j, Eigen::Index m, std::size_t dim,
                                                                          const std::string& where) {
    const auto mm = static_cast<std::size_t>(m);
    if (!j.is_array() || j.size() != mm) throw ConfigError(where + ": expected an m x m array");
    std::vector<std::vector<std::optional<TransportSpec>>> out(mm);
    for (std::size_t i = 0; i < mm; ++i) {
        if (!j[i].is_array() || j[i].size() != mm) throw ConfigError(where + ": expected an m x m array");
        for (std::size_t k = 0; k < mm; ++k) {
            out[i].push_back(parse_transport(j[i][k], dim, where + "/" + std::to_string(i) + "/" + std::to_string(k)));
        }
    }
    return out;
}

TrigMatrix parse_trig_matrix(const json& j, Eigen::Index m, std::size_t dim, const std::string& where) {
    const auto mm = static_cast<std::size_t>(m);
    if (!j.is_array() || j.size() != mm) throw ConfigError(where + ": expected an m x m array");
    TrigMatrix out(m, m);
    for (std::size_t i = 0; i < mm; ++i) {
        if (!j[i].is_array() || j[i].size() != mm) throw ConfigError(where + ": expected an m x m array");
        for (std::size_t k = 0; k < mm; ++k) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                parse_trig_at(j[i][k], dim, where + "/" + std::to_string(i) + "/" + std::to_string(k));
        }
    }
    return out;
}

PipeSpec parse_pipe(const json& j, const std::string& where) {
    if (j.is_number()) return PipeSpec::delay(j.get<double>());
    if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array()) {
        throw ConfigError(where + ": expected a lag or {atoms: [[lag, weight], ...]}");
    }
    PipeSpec p;
    p.atoms.clear();
    for (const auto& a : j["atoms"]) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
            throw ConfigError(where + "/atoms: each atom is [lag, weight]");
        }
        p.atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
    }
    return p;
}

HistorySpec parse_history(Reader r, Eigen::Index m, const std::filesystem::path& base_dir) {
    HistorySpec h;
    if (r.has("csv")) {
        const std::filesystem::path p = r.string("csv");
        h.csv = p.is_absolute() ? p : base_dir / p;
        return h;
    }
    std::vector<double> c = r.numbers("constant", std::vector<double>(static_cast<std::size_t>(m), 0.0));
    if (c.size() == 1 && m > 1) c.assign(static_cast<std::size_t>(m), c[0]);
    if (c.size() != static_cast<std::size_t>(m)) r.fail("constant needs m entries");
    h.constant = Eigen::Map<const Vector>(c.data(), m);
    if (r.has("waves")) {
        const json& ws = r.verbatim("waves");
        if (!ws.is_array()) r.fail("waves: expected an array");
        for (const auto& w : ws) {
            HistorySpec::Wave wave;
            if (!w.is_object()) r.fail("waves: expected objects");
            const int comp = w.value("component", 1);
            if (comp < 1 || comp > m) r.fail("waves: component out of range 1..m");
            wave.component = comp - 1;
            wave.amplitude = w.value("amplitude", 0.0);
            wave.frequency = w.value("frequency", 0.0);
            wave.phase = w.value("phase", 0.0);
            h.waves.push_back(wave);
        }
    }
    r.reject_unknown({"constant", "waves", "csv"});
    return h;
}

}  // namespace

TrigPoly parse_trig(const json& j, std::size_t dim) { return parse_trig_at(j, dim, "trig"); }

std::unique_ptr<HistorySource> HistorySpec::build(Eigen::Index m, double step) const {
    if (csv) {
        std::ifstream in(*csv);
        if (!in) throw ConfigError("history csv: cannot open " + csv->string());
        HistoryGrid g = read_history_csv(in);
        if (g.dim() != m) throw ConfigError("history csv: expected " + std::to_string(m) + " value columns");
        return std::make_unique<HistoryGrid>(std::move(g));
    }
    const Vector c = constant;
    const std::vector<Wave> ws = waves;
    return std::make_unique<FunctionHistory>(
        m,
        [c, ws](double s) {
            Vector v = c;
            for (const auto& w : ws) v(w.component) += w.amplitude * std::sin(2.0 * M_PI * w.frequency * s + w.phase);
            return v;
        },
        step);
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    ojson& echo = cfg.echo;
    echo = ojson::object();
    Reader root(doc, echo, "");
    root.reject_unknown({"schema", "flow", "system", "initial", "initial_y", "cone", "sim", "sampling", "check",
                         "invert", "thresholds", "covering", "task", "comment"});
    const int schema = root.integer("schema", kSchemaVersion);
    if (schema != kSchemaVersion) root.fail("unsupported schema " + std::to_string(schema));

    {
        Reader f = root.child("flow");
        f.reject_unknown({"freqs", "theta0"});
        const auto freqs = f.numbers("freqs", std::vector<double>{kGoldenFrequency});
        if (freqs.empty()) f.fail("freqs must be nonempty");
        cfg.flow = TorusFlow(freqs);
        auto theta = f.numbers("theta0", std::vector<double>(freqs.size(), 0.0));
        if (theta.size() != freqs.size()) f.fail("theta0 must match freqs in length");
        cfg.p0 = cfg.flow.point(theta);
    }
    const std::size_t dim = cfg.flow.dim();

    Eigen::Index m = 0;
    {
        Reader s = root.child("system", false);
        const std::string kind = s.string("kind", std::string("neutral_diag"));
        m = s.integer("m");
        if (m < 1) s.fail("m must be >= 1");
        const auto mm = static_cast<std::size_t>(m);
        if (kind == "neutral_diag") {
            s.reject_unknown({"kind", "m", "c", "alpha", "rho", "transports"});
            NeutralDiagSystem nd;
            nd.m = m;
            nd.flow = cfg.flow;
            const json& cj = s.verbatim("c");
            if (!cj.is_array() || cj.size() != mm) s.fail("c needs m entries");
            for (std::size_t i = 0; i < mm; ++i) nd.c.push_back(parse_trig_at(cj[i], dim, s.at("c/" + std::to_string(i))));
            nd.alpha = s.numbers("alpha");
            if (nd.alpha.size() != mm) s.fail("alpha needs m entries");
            const json& rj = s.verbatim("rho");
            if (!rj.is_array() || rj.size() != mm) s.fail("rho must be m x m");
            for (const auto& row : rj) {
                if (!row.is_array() || row.size() != mm) s.fail("rho must be m x m");
                std::vector<double> r;
                for (const auto& x : row) {
                    if (!x.is_number()) s.fail("rho entries must be numbers");
                    r.push_back(x.get<double>());
                }
                nd.rho.push_back(r);
            }
            nd.transports = parse_transports(s.verbatim("transports"), m, dim, s.at("transports"));
            try {
                cfg.system.emplace(nd.to_compartmental());
            } catch (const DimensionMismatch& e) {
                throw ConfigError(s.where() + ": " + e.what());
            }
            cfg.diag = std::move(nd);
        } else if (kind == "general") {
            s.reject_unknown({"kind", "m", "B", "atoms", "density", "transports", "pipes", "inflows", "outflows"});
            TrigMatrix b = s.has("B") ? parse_trig_matrix(s.verbatim("B"), m, dim, s.at("B")) : TrigMatrix::identity(m);
            AtomicMeasureFamily nu;
            if (s.has("atoms")) {
                const json& aj = s.verbatim("atoms");
                if (!aj.is_array()) s.fail("atoms: expected an array");
                for (std::size_t k = 0; k < aj.size(); ++k) {
                    const std::string w = s.at("atoms/" + std::to_string(k));
                    if (!aj[k].is_object() || !aj[k].contains("lag") || !aj[k]["lag"].is_number() ||
                        !aj[k].contains("weight")) {
                        throw ConfigError(w + ": expected {lag, weight}");
                    }
                    nu.atoms.push_back(MeasureAtom{aj[k]["lag"].get<double>(),
                                                   parse_trig_matrix(aj[k]["weight"], m, dim, w + "/weight")});
                }
            }
            if (s.has("density")) {
                const json& dj = s.verbatim("density");
                if (!dj.is_object() || !dj.contains("width") || !dj["width"].is_number() || !dj.contains("cells") ||
                    !dj["cells"].is_array()) {
                    s.fail("density: expected {width, cells}");
                }
                MeasureDensity d;
                d.width = dj["width"].get<double>();
                for (std::size_t k = 0; k < dj["cells"].size(); ++k) {
                    d.cells.push_back(parse_trig_matrix(dj["cells"][k], m, dim, s.at("density/cells/" + std::to_string(k))));
                }
                nu.density = std::move(d);
            }
            auto transports = parse_transports(s.verbatim("transports"), m, dim, s.at("transports"));
            std::vector<std::vector<PipeSpec>> pipes(mm, std::vector<PipeSpec>(mm));
            if (s.has("pipes")) {
                const json& pj = s.verbatim("pipes");
                if (!pj.is_array() || pj.size() != mm) s.fail("pipes must be m x m");
                for (std::size_t i = 0; i < mm; ++i) {
                    if (!pj[i].is_array() || pj[i].size() != mm) s.fail("pipes must be m x m");
                    for (std::size_t k = 0; k < mm; ++k) {
                        pipes[i][k] = parse_pipe(pj[i][k], s.at("pipes/" + std::to_string(i) + "/" + std::to_string(k)));
                    }
                }
            }
            std::vector<TrigPoly> inflows(mm, TrigPoly(0.0));
            if (s.has("inflows")) {
                const json& ij = s.verbatim("inflows");
                if (!ij.is_array() || ij.size() != mm) s.fail("inflows needs m entries");
                for (std::size_t i = 0; i < mm; ++i) inflows[i] = parse_trig_at(ij[i], dim, s.at("inflows/" + std::to_string(i)));
            }
            std::vector<std::optional<TransportSpec>> outflows(mm);
            if (s.has("outflows")) {
                const json& oj = s.verbatim("outflows");
                if (!oj.is_array() || oj.size() != mm) s.fail("outflows needs m entries");
                for (std::size_t i = 0; i < mm; ++i) outflows[i] = parse_transport(oj[i], dim, s.at("outflows/" + std::to_string(i)));
            }
            try {
                cfg.system.emplace(CompartmentalSystem{m, std::move(transports), std::move(outflows), std::move(inflows),
                                                       std::move(pipes), DOperatorSpec(cfg.flow, std::move(b), std::move(nu))});
            } catch (const DimensionMismatch& e) {
                throw ConfigError(s.where() + ": " + e.what());
            }
        } else {
            s.fail("kind must be \"neutral_diag\" or \"general\"");
        }
    }

    cfg.initial = parse_history(root.child("initial"), m, base_dir);

    if (root.has("initial_y")) {
        Reader y = root.child("initial_y");
        y.reject_unknown({"mode", "epsilon", "history", "equalize_mass"});
        PairYSpec py;
        const std::string mode = y.string("mode", std::string("comparison"));
        if (mode == "comparison") {
            py.mode = PairYSpec::Mode::Comparison;
            py.epsilon = y.number("epsilon", 0.1);
            if (!(py.epsilon > 0.0)) y.fail("epsilon must be positive");
        } else if (mode == "history") {
            py.mode = PairYSpec::Mode::History;
            py.history = parse_history(y.child("history", false), m, base_dir);
        } else {
            y.fail("mode must be \"comparison\" or \"history\"");
        }
        py.equalize_mass = y.boolean("equalize_mass", false);
        cfg.initial_y = py;
    }

    if (root.has("cone")) {
        Reader c = root.child("cone");
        c.reject_unknown({"A_diag", "A", "horizon", "assume_hurwitz", "tol"});
        ConeSpec cone;
        if (c.has("A")) {
            const json& aj = c.verbatim("A");
            if (!aj.is_array() || aj.size() != static_cast<std::size_t>(m)) c.fail("A must be m x m");
            cone.a = Matrix(m, m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const json& row = aj[static_cast<std::size_t>(i)];
                if (!row.is_array() || row.size() != static_cast<std::size_t>(m)) c.fail("A must be m x m");
                for (Eigen::Index k = 0; k < m; ++k) {
                    if (!row[static_cast<std::size_t>(k)].is_number()) c.fail("A entries must be numbers");
                    cone.a(i, k) = row[static_cast<std::size_t>(k)].get<double>();
                }
            }
        } else {
            const auto d = c.numbers("A_diag");
            if (d.size() != static_cast<std::size_t>(m)) c.fail("A_diag needs m entries");
            cone = ConeSpec::diagonal(d, std::nullopt);
        }
        if (c.has("horizon") && c.raw("horizon").is_string()) {
            if (c.string("horizon") != "infinite") c.fail("horizon must be a positive number or \"infinite\"");
            cone.horizon.reset();
        } else {
            cone.horizon = c.number("horizon", 1.0);
        }
        cone.assume_hurwitz = c.boolean("assume_hurwitz", false);
        cfg.sim.tol_cone = c.number("tol", kDefaultConeTol);
        cfg.sim.cone = cone;
    }

    {
        Reader s = root.child("sim");
        s.reject_unknown({"h", "t_end", "inv_tol", "n_trunc", "log_stride"});
        cfg.sim.h = s.number("h", 0.01);
        cfg.sim.t_end = s.number("t_end", 10.0);
        cfg.sim.inv_tol = s.number("inv_tol", 1e-8);
        cfg.sim.n_trunc = s.integer("n_trunc", 0);
        cfg.sim.log_stride = s.integer("log_stride", 1);
        if (!(cfg.sim.h > 0.0) || !(cfg.sim.t_end > 0.0) || !(cfg.sim.inv_tol > 0.0) || cfg.sim.n_trunc < 0 ||
            cfg.sim.log_stride < 1) {
            s.fail("h, t_end, inv_tol must be positive, n_trunc >= 0, log_stride >= 1");
        }
    }
    {
        Reader s = root.child("sampling");
        s.reject_unknown({"grid_per_dim", "orbit_points", "orbit_dt"});
        cfg.sampling.grid_per_dim = s.integer("grid_per_dim", 64);
        cfg.sampling.orbit_points = s.integer("orbit_points", 512);
        cfg.sampling.orbit_dt = s.number("orbit_dt", OmegaSampling{}.orbit_dt);
        if (cfg.sampling.grid_per_dim < 1 || cfg.sampling.orbit_points < 0) s.fail("sample counts out of range");
    }
    {
        Reader c = root.child("check");
        c.reject_unknown({"conditions", "a", "a_grid", "n_check", "strictness_tol"});
        cfg.check.conditions.clear();
        std::vector<std::string> names{"G5"};
        if (c.has("conditions")) {
            const json& cj = c.verbatim("conditions");
            if (!cj.is_array()) c.fail("conditions: expected an array of names");
            names.clear();
            for (const auto& n : cj) {
                if (!n.is_string()) c.fail("conditions: expected names");
                names.push_back(n.get<std::string>());
            }
        } else {
            ojson arr = ojson::array();
            arr.push_back("G5");
            echo["check"]["conditions"] = arr;
        }
        for (const auto& n : names) {
            try {
                cfg.check.conditions.push_back(condition_from_string(n));
            } catch (const DomainError& e) {
                c.fail(e.what());
            }
        }
        if (c.has("a") && c.raw("a").is_array()) {
            cfg.check.a = c.numbers("a");
            if (cfg.check.a->size() != static_cast<std::size_t>(m)) c.fail("a needs m entries");
            for (double x : *cfg.check.a) {
                if (!(x <= 0.0)) c.fail("a entries must be <= 0");
            }
        } else if (c.string("a", std::string("auto")) != "auto") {
            c.fail("a must be an array or \"auto\"");
        }
        std::vector<double> grid;
        for (int k = 0; k <= 40; ++k) grid.push_back(-0.25 * k);
        cfg.check.a_grid = c.numbers("a_grid", grid);
        if (cfg.check.a_grid.empty()) c.fail("a_grid must be nonempty");
        cfg.check.options.n_check = c.integer("n_check", 50);
        cfg.check.options.strictness_tol = c.number("strictness_tol", 1e-9);
        cfg.check.options.sampling = cfg.sampling;
        if (cfg.check.options.n_check < 1) c.fail("n_check must be >= 1");
    }
    {
        Reader v = root.child("invert");
        v.reject_unknown({"yhat", "tol", "depth", "step"});
        cfg.invert.yhat = parse_history(v.child("yhat"), m, base_dir);
        cfg.invert.tol = v.number("tol", 1e-8);
        cfg.invert.depth = v.number("depth", 10.0);
        cfg.invert.step = v.number("step", 0.01);
        if (!(cfg.invert.tol > 0.0) || !(cfg.invert.depth > 0.0) || !(cfg.invert.step > 0.0)) {
            v.fail("tol, depth, step must be positive");
        }
    }
    {
        Reader t = root.child("thresholds");
        t.reject_unknown({"cone_margin", "mass_residual"});
        cfg.thresholds.cone_margin = t.number("cone_margin", 1e-7);
        cfg.thresholds.mass_residual = t.number("mass_residual", 1e-4);
    }
    {
        Reader c = root.child("covering");
        c.reject_unknown({"return_tols", "window", "t_transient", "t_min"});
        cfg.covering.return_tols = c.numbers("return_tols", std::vector<double>{1e-1, 3e-2, 1e-2});
        cfg.covering.options.window = c.number("window", 10.0);
        cfg.covering.options.t_transient = c.number("t_transient", 100.0);
        cfg.covering.options.t_min = c.number("t_min", 1.0);
        if (cfg.covering.return_tols.empty()) c.fail("return_tols must be nonempty");
        for (double r : cfg.covering.return_tols) {
            if (!(r > 0.0)) c.fail("return_tols must be positive");
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc, path.parent_path());
}

}  // namespace nfde
