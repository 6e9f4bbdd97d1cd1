#include "mesotree/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "mesotree/errors.hpp"

namespace mesotree {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end) throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
    return x;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
    // Accept integral values written in scientific notation such as 5e4.
    std::int64_t x = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec == std::errc() && p == end) return x;
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
    return static_cast<std::int64_t>(d);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end) throw ConfigError(fmt::format("{}: '{}' is not an unsigned integer", key, v));
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::string get(const KeyValues& kv, const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt::format("{}", xs[i]);
    return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "n_final",     "kernel.kind", "kernel.alpha", "kernel.table", "kernel.tail",
        "kernel.f_star", "kernel.monotone", "delay.kind", "delay.param", "beta",
        "seed",        "replicates",  "sampler",      "fringe_cap"};
    return keys;
}

KeyValues read_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    const auto& keys = config_keys();
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", lineno));
        const auto key = trim(t.substr(0, eq));
        const auto value = trim(t.substr(eq + 1));
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(fmt::format("line {}: unknown key '{}'", lineno, key));
        if (!kv.emplace(key, value).second) throw ConfigError(fmt::format("line {}: duplicate key '{}'", lineno, key));
    }
    return kv;
}

KeyValues load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    return read_key_values(in);
}

DelayLaw parse_delay(const std::string& spec, double beta) {
    const auto colon = spec.find(':');
    const auto kind = colon == std::string::npos ? spec : spec.substr(0, colon);
    const auto param = colon == std::string::npos ? std::string{} : spec.substr(colon + 1);
    const auto need_param = [&] {
        if (param.empty()) throw ConfigError(fmt::format("delay '{}' needs a parameter", kind));
    };
    try {
        if (kind == "zero") return DelayLaw(ZeroDelay{}, beta);
        if (kind == "uniform") return DelayLaw(Uniform01Delay{}, beta);
        if (kind == "const" || kind == "constant") {
            need_param();
            return DelayLaw(ConstantDelay{to_double("delay.param", param)}, beta);
        }
        if (kind == "invpow") {
            need_param();
            return DelayLaw(InversePowerDelay{to_double("delay.param", param)}, beta);
        }
        if (kind == "pareto") {
            need_param();
            const auto parts = split(param, ',');
            if (parts.size() != 2) throw ConfigError("pareto delay parameter is 'tail,scale'");
            return DelayLaw(ParetoDelay{to_double("delay.param", parts[0]), to_double("delay.param", parts[1])},
                            beta);
        }
        if (kind == "table") {
            need_param();
            QuantileTableDelay table;
            for (const auto& knot : split(param, ',')) {
                const auto c = knot.find(':');
                if (c == std::string::npos) throw ConfigError("quantile table knots are 'u:q'");
                table.knots.emplace_back(to_double("delay.param", trim(knot.substr(0, c))),
                                         to_double("delay.param", trim(knot.substr(c + 1))));
            }
            return DelayLaw(std::move(table), beta);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("delay '{}': {}", spec, e.what()));
    }
    throw ConfigError(fmt::format("unknown delay kind '{}'", kind));
}

std::string delay_spec(const DelayLaw& delay) {
    const auto& k = delay.kind();
    if (std::holds_alternative<ZeroDelay>(k)) return "zero";
    if (std::holds_alternative<Uniform01Delay>(k)) return "uniform";
    if (const auto* c = std::get_if<ConstantDelay>(&k)) return fmt::format("const:{}", c->value);
    if (const auto* d = std::get_if<InversePowerDelay>(&k)) return fmt::format("invpow:{}", d->power);
    if (const auto* d = std::get_if<ParetoDelay>(&k)) return fmt::format("pareto:{},{}", d->tail_index, d->scale);
    const auto& t = std::get<QuantileTableDelay>(k);
    std::string out = "table:";
    for (std::size_t i = 0; i < t.knots.size(); ++i)
        out += fmt::format("{}{}:{}", i ? "," : "", t.knots[i].first, t.knots[i].second);
    return out;
}

RunSettings settings_from(const KeyValues& kv) {
    const auto& keys = config_keys();
    for (const auto& [key, value] : kv)
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(fmt::format("unknown key '{}'", key));

    RunSettings s;
    auto& g = s.growth;
    g.n_final = to_int("n_final", get(kv, "n_final", "1000"));
    s.replicates = static_cast<int>(to_int("replicates", get(kv, "replicates", "1")));
    g.seed = to_u64("seed", get(kv, "seed", "1"));
    g.fringe_size_cap = static_cast<int>(to_int("fringe_cap", get(kv, "fringe_cap", "6")));
    const double beta = to_double("beta", get(kv, "beta", "0.5"));

    try {
        g.sampler = parse_sampler(get(kv, "sampler", "auto"));

        const auto kind = get(kv, "kernel.kind", "affine");
        if (kind == "uniform") {
            g.kernel = AttachmentKernel::uniform();
        } else if (kind == "affine") {
            g.kernel = AttachmentKernel::affine(to_double("kernel.alpha", get(kv, "kernel.alpha", "0")));
        } else if (kind == "tabulated") {
            const auto table_text = get(kv, "kernel.table", "");
            if (table_text.empty()) throw ConfigError("tabulated kernel needs kernel.table");
            std::vector<double> values;
            for (const auto& v : split(table_text, ',')) values.push_back(to_double("kernel.table", v));
            const auto tail_text = get(kv, "kernel.tail", "constant");
            TailRule tail = ConstantTail{};
            if (tail_text.rfind("power:", 0) == 0)
                tail = PowerTail{to_double("kernel.tail", tail_text.substr(6))};
            else if (tail_text != "constant")
                throw ConfigError(fmt::format("kernel.tail: unknown rule '{}'", tail_text));
            if (!kv.contains("kernel.f_star") || !kv.contains("kernel.monotone"))
                throw ConfigError("tabulated kernel needs explicit kernel.f_star and kernel.monotone");
            g.kernel = AttachmentKernel::tabulated(std::move(values), tail,
                                                   to_double("kernel.f_star", kv.at("kernel.f_star")),
                                                   to_bool("kernel.monotone", kv.at("kernel.monotone")));
        } else {
            throw ConfigError(fmt::format("kernel.kind: unknown kind '{}'", kind));
        }

        auto delay_kind = get(kv, "delay.kind", "zero");
        const auto delay_param = get(kv, "delay.param", "");
        if (!delay_param.empty() && delay_kind.find(':') == std::string::npos)
            delay_kind += ":" + delay_param;
        g.delay = parse_delay(delay_kind, beta);

        g.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (s.replicates < 1) throw ConfigError("replicates must be >= 1");
    return s;
}

KeyValues to_key_values(const RunSettings& s) {
    const auto& g = s.growth;
    KeyValues kv;
    kv["n_final"] = fmt::format("{}", g.n_final);
    kv["replicates"] = fmt::format("{}", s.replicates);
    kv["seed"] = fmt::format("{}", g.seed);
    kv["fringe_cap"] = fmt::format("{}", g.fringe_size_cap);
    kv["beta"] = fmt::format("{}", g.delay.beta());
    kv["sampler"] = to_string(g.sampler);

    const auto& k = g.kernel;
    kv["kernel.alpha"] = k.is_affine() ? fmt::format("{}", k.alpha()) : "0";
    kv["kernel.table"] = "";
    kv["kernel.tail"] = "constant";
    kv["kernel.f_star"] = fmt::format("{}", k.f_star());
    kv["kernel.monotone"] = k.monotone() ? "true" : "false";
    if (k.is_uniform()) {
        kv["kernel.kind"] = "uniform";
    } else if (k.is_affine()) {
        kv["kernel.kind"] = "affine";
    } else {
        const auto& t = std::get<TabulatedKernel>(k.kind());
        kv["kernel.kind"] = "tabulated";
        kv["kernel.table"] = join_doubles(t.values);
        if (const auto* p = std::get_if<PowerTail>(&t.tail)) kv["kernel.tail"] = fmt::format("power:{}", p->exponent);
    }

    const auto spec = delay_spec(g.delay);
    const auto colon = spec.find(':');
    kv["delay.kind"] = spec.substr(0, colon);
    kv["delay.param"] = colon == std::string::npos ? "" : spec.substr(colon + 1);
    return kv;
}

std::string echo_text(const RunSettings& settings) {
    const auto kv = to_key_values(settings);
    std::string out;
    for (const auto& key : config_keys()) out += fmt::format("{} = {}\n", key, kv.at(key));
    return out;
}

std::string config_hash(const RunSettings& settings) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : echo_text(settings)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace mesotree
