#include "pbetc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace pbetc {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        const auto p = s.find(sep);
        out.push_back(trim(s.substr(0, p)));
        if (p == std::string_view::npos) break;
        s.remove_prefix(p + 1);
    }
    return out;
}

bool parse_number(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

struct Entry {
    std::string value;
    std::size_t line;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"plant", {"epsilon", "lambda", "q", "theta1", "theta2", "u0", "n_nodes"}},
        {"trigger",
         {"kind", "family", "gamma", "eta", "c", "sigma", "m0", "kappa", "B", "h", "robust_residual",
          "kernel_refinement", "stc_cap_factor"}},
        {"sim",
         {"dt", "T_final", "record_stride", "disturbance_amplitude", "disturbance_start", "disturbance_duration"}},
    };
    return keys;
}

class Reader {
public:
    explicit Reader(std::map<std::string, Section> sections) : sections_(std::move(sections)) {}

    const Entry* find(const std::string& sec, const std::string& key) const {
        const auto s = sections_.find(sec);
        if (s == sections_.end()) return nullptr;
        const auto e = s->second.find(key);
        return e == s->second.end() ? nullptr : &e->second;
    }

    const Entry& require(const std::string& sec, const std::string& key) const {
        const Entry* e = find(sec, key);
        if (!e) throw Error(ErrorCode::ValidationError, key);
        return *e;
    }

    double number(const Entry& e, const std::string& key) const {
        double v = 0.0;
        if (!parse_number(e.value, v))
            throw Error(ErrorCode::ParseError, "line " + std::to_string(e.line) + ": " + key + " is not a number");
        return v;
    }

    double number(const std::string& sec, const std::string& key) const { return number(require(sec, key), key); }

    double number_or(const std::string& sec, const std::string& key, double fallback) const {
        const Entry* e = find(sec, key);
        return e ? number(*e, key) : fallback;
    }

    long integer_or(const std::string& sec, const std::string& key, long fallback) const {
        const Entry* e = find(sec, key);
        if (!e) return fallback;
        long v = 0;
        const auto& s = e->value;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(e->line) + ": " + key + " is not an integer");
        return v;
    }

    bool flag_or(const std::string& sec, const std::string& key, bool fallback) const {
        const Entry* e = find(sec, key);
        if (!e) return fallback;
        if (e->value == "true" || e->value == "1" || e->value == "on") return true;
        if (e->value == "false" || e->value == "0" || e->value == "off") return false;
        throw Error(ErrorCode::ParseError, "line " + std::to_string(e->line) + ": " + key + " must be true or false");
    }

private:
    std::map<std::string, Section> sections_;
};

SpatialProfile profile_from_csv(const std::filesystem::path& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<double> xs, vs;
    std::string line;
    for (std::size_t ln = 1; std::getline(in, line); ++ln) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto f = split_list(t, ',');
        double x = 0.0, v = 0.0;
        if (f.size() != 2 || !parse_number(f[0], x) || !parse_number(f[1], v)) {
            if (xs.empty() && ln == 1) continue;  // header
            throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(ln) + ": expected x,value");
        }
        xs.push_back(x);
        vs.push_back(v);
    }
    const Eigen::Map<const Eigen::VectorXd> xv(xs.data(), static_cast<Index>(xs.size()));
    const Grid src = Grid::from_nodes(xv);
    return resample(SpatialProfile(src, Eigen::Map<const Eigen::VectorXd>(vs.data(), static_cast<Index>(vs.size()))),
                    grid);
}

std::vector<double> numbers(std::string_view list, std::string_view spec) {
    std::vector<double> out;
    for (auto part : split_list(list, ',')) {
        double v = 0.0;
        if (!parse_number(part, v)) throw Error(ErrorCode::ParseError, "bad number in profile '" + std::string(spec) + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

SpatialProfile parse_profile(std::string_view spec, const Grid& grid, const std::filesystem::path& base_dir) {
    spec = trim(spec);
    const auto colon = spec.find(':');
    const std::string_view name = trim(spec.substr(0, colon));
    const std::string_view args = colon == std::string_view::npos ? std::string_view{} : trim(spec.substr(colon + 1));
    auto arity = [&](std::size_t n) {
        auto v = numbers(args, spec);
        if (v.size() != n) throw Error(ErrorCode::ParseError, "profile '" + std::string(spec) + "' needs " + std::to_string(n) + " value(s)");
        return v;
    };
    if (name == "zero" && args.empty()) return SpatialProfile::constant(grid, 0.0);
    if (name == "constant") return SpatialProfile::constant(grid, arity(1)[0]);
    if (name == "affine") {
        const auto v = arity(2);
        return SpatialProfile::sample(grid, [&](double x) { return v[0] + v[1] * x; });
    }
    if (name == "quartic") {
        const double A = arity(1)[0];
        return SpatialProfile::sample(grid, [&](double x) { return A * x * x * (x - 1.0) * (x - 1.0); });
    }
    if (name == "values") {
        const auto v = numbers(args, spec);
        if (static_cast<Index>(v.size()) != grid.size())
            throw Error(ErrorCode::ValidationError, "values profile length must equal n_nodes");
        return SpatialProfile(grid, Eigen::Map<const Eigen::VectorXd>(v.data(), grid.size()));
    }
    if (name == "csv") {
        std::filesystem::path p{std::string(args)};
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return profile_from_csv(p, grid);
    }
    throw Error(ErrorCode::ParseError, "unknown profile preset '" + std::string(spec) + "'");
}

SimConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
    std::map<std::string, Section> sections;
    std::string current;
    std::istringstream in{std::string(text)};
    std::string raw;
    for (std::size_t ln = 1; std::getline(in, raw); ++ln) {
        std::string_view line = raw;
        if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(ln) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw Error(ErrorCode::ParseError, where + "unterminated section header");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_keys().count(current)) throw Error(ErrorCode::ParseError, where + "unknown section [" + current + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorCode::ParseError, where + "expected key = value");
        if (current.empty()) throw Error(ErrorCode::ParseError, where + "key outside of a section");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (!known_keys().at(current).count(key))
            throw Error(ErrorCode::ParseError, where + "unknown key '" + key + "' in [" + current + "]");
        if (!sections[current].emplace(key, Entry{value, ln}).second)
            throw Error(ErrorCode::ParseError, where + "duplicate key '" + key + "'");
    }

    const Reader r(std::move(sections));

    const long n_nodes = r.integer_or("plant", "n_nodes", 201);
    if (n_nodes < 5) throw Error(ErrorCode::ValidationError, "n_nodes >= 5");
    const Grid grid(n_nodes);
    const double epsilon = r.number("plant", "epsilon");
    const double q = r.number("plant", "q");
    SpatialProfile lambda = parse_profile(r.require("plant", "lambda").value, grid, base_dir);
    SpatialProfile u0 = parse_profile(r.require("plant", "u0").value, grid, base_dir);
    const auto theta1 = static_cast<int>(r.integer_or("plant", "theta1", 1));
    const auto theta2 = static_cast<int>(r.integer_or("plant", "theta2", theta1 == 1 ? 0 : 1));
    PlantConfig plant{epsilon, std::move(lambda), q, theta1, theta2, std::move(u0)};

    UserParams user;
    const auto kind = parse_trigger_kind(r.require("trigger", "kind").value);
    if (!kind) throw Error(ErrorCode::ValidationError, "kind in {CETC, PETC, STC}");
    if (const Entry* fam = r.find("trigger", "family")) {
        const auto f = parse_trigger_family(fam->value);
        if (!f) throw Error(ErrorCode::ValidationError, "family in {regular, performance}");
        user.family = *f;
    }
    user.gamma = r.number_or("trigger", "gamma", 1.0);
    user.eta = r.number("trigger", "eta");
    user.c = r.number_or("trigger", "c", 0.0);
    user.sigma = r.number("trigger", "sigma");
    user.m0 = r.number("trigger", "m0");
    user.kappa = r.number("trigger", "kappa");
    const Entry& b = r.require("trigger", "B");
    if (b.value != "auto") user.B = r.number(b, "B");
    user.h = r.number_or("trigger", "h", 0.0);
    user.robust_residual = r.flag_or("trigger", "robust_residual", false);
    user.kernel_refinement = static_cast<int>(r.integer_or("trigger", "kernel_refinement", 6));
    user.stc_cap_factor = r.number_or("trigger", "stc_cap_factor", 100.0);

    SimConfig cfg{std::move(plant), user, *kind, r.number("sim", "dt"), r.number("sim", "T_final"),
                  static_cast<int>(r.integer_or("sim", "record_stride", 1)), std::nullopt};
    if (r.find("sim", "disturbance_amplitude") || r.find("sim", "disturbance_start") ||
        r.find("sim", "disturbance_duration")) {
        cfg.disturbance = Disturbance{r.number("sim", "disturbance_amplitude"), r.number("sim", "disturbance_start"),
                                      r.number("sim", "disturbance_duration")};
    }
    cfg.validate();
    if (cfg.kind == TriggerKind::PETC) {
        if (!(user.h > 0.0)) throw Error(ErrorCode::ValidationError, "h > 0 for PETC");
        const double ratio = user.h / cfg.dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw Error(ErrorCode::ValidationError, "h is an integer multiple of dt");
    }
    return cfg;
}

SimConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.parent_path());
}

namespace {

std::string values_spec(const SpatialProfile& p) {
    std::string s = "values:";
    for (Index i = 0; i < p.size(); ++i) {
        if (i) s += ',';
        s += format_double(p[i]);
    }
    return s;
}

}  // namespace

std::string serialize_config(const SimConfig& c) {
    std::ostringstream os;
    const auto& p = c.plant;
    const auto& u = c.user;
    os << "[plant]\n"
       << "n_nodes = " << p.grid().size() << '\n'
       << "epsilon = " << format_double(p.epsilon) << '\n'
       << "lambda = " << values_spec(p.lambda) << '\n'
       << "q = " << format_double(p.q) << '\n'
       << "theta1 = " << p.theta1 << '\n'
       << "theta2 = " << p.theta2 << '\n'
       << "u0 = " << values_spec(p.u0) << '\n'
       << "\n[trigger]\n"
       << "kind = " << to_string(c.kind) << '\n'
       << "family = " << to_string(u.family) << '\n'
       << "gamma = " << format_double(u.gamma) << '\n'
       << "eta = " << format_double(u.eta) << '\n'
       << "c = " << format_double(u.c) << '\n'
       << "sigma = " << format_double(u.sigma) << '\n'
       << "m0 = " << format_double(u.m0) << '\n'
       << "kappa = " << format_double(u.kappa) << '\n'
       << "B = " << (u.B ? format_double(*u.B) : std::string("auto")) << '\n'
       << "h = " << format_double(u.h) << '\n'
       << "robust_residual = " << (u.robust_residual ? "true" : "false") << '\n'
       << "kernel_refinement = " << u.kernel_refinement << '\n'
       << "stc_cap_factor = " << format_double(u.stc_cap_factor) << '\n'
       << "\n[sim]\n"
       << "dt = " << format_double(c.dt) << '\n'
       << "T_final = " << format_double(c.T_final) << '\n'
       << "record_stride = " << c.record_stride << '\n';
    if (c.disturbance) {
        os << "disturbance_amplitude = " << format_double(c.disturbance->amplitude) << '\n'
           << "disturbance_start = " << format_double(c.disturbance->start) << '\n'
           << "disturbance_duration = " << format_double(c.disturbance->duration) << '\n';
    }
    return os.str();
}

std::string config_hash(const SimConfig& config) {
    // FNV-1a, 64 bit
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : serialize_config(config)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SimConfig example_config() {
    const Grid grid(201);
    PlantConfig plant{0.1, SpatialProfile::constant(grid, 0.25), 2.0, 1, 0,
                      SpatialProfile::sample(grid, [](double x) { return 10.0 * x * x * (x - 1.0) * (x - 1.0); })};
    UserParams user;
    user.gamma = 1.0;
    user.eta = 0.0383;
    user.c = 1.0;
    user.sigma = 0.9;
    user.m0 = 1e-4;
    user.kappa = 5.0;
    user.B = 3325.0;
    user.h = 0.01;
    return SimConfig{std::move(plant), user, TriggerKind::CETC, 0.001, 500.0, 1, std::nullopt};
}

}  // namespace pbetc
