#include "shapeopt/config.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError(std::string(key) + ": invalid value '" + std::string(value) + "'");
    }
    return out;
}

}  // namespace

void set_config_value(ExperimentConfig& c, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "f1") c.f1 = parse_number<double>(key, value);
    else if (key == "f2") c.f2 = parse_number<double>(key, value);
    else if (key == "mu") c.mu = parse_number<double>(key, value);
    else if (key == "levels") c.levels = parse_number<int>(key, value);
    else if (key == "n") c.n = parse_number<int>(key, value);
    else if (key == "max_sqp_iters") c.max_sqp_iters = parse_number<int>(key, value);
    else if (key == "cg_tol") c.cg_tol = parse_number<double>(key, value);
    else if (key == "alpha") c.alpha = parse_number<double>(key, value);
    else if (key == "baseline_scaling") c.baseline_scaling = parse_number<double>(key, value);
    else if (key == "baseline_iters") c.baseline_iters = parse_number<int>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else throw ConfigError("unknown key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
    std::set<std::string, std::less<>> seen;
    int lineno = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        if (!seen.insert(std::string(key)).second) {
            throw ConfigError("duplicate key '" + std::string(key) + "'");
        }
        set_config_value(base, key, line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), base);
}

std::string format_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "f1 = " << c.f1 << '\n'
       << "f2 = " << c.f2 << '\n'
       << "mu = " << c.mu << '\n'
       << "levels = " << c.levels << '\n'
       << "n = " << c.n << '\n'
       << "max_sqp_iters = " << c.max_sqp_iters << '\n'
       << "cg_tol = " << c.cg_tol << '\n'
       << "alpha = " << c.alpha << '\n'
       << "baseline_scaling = " << c.baseline_scaling << '\n'
       << "baseline_iters = " << c.baseline_iters << '\n'
       << "seed = " << c.seed << '\n';
    return os.str();
}

std::string_view tool_version() noexcept { return "shapeopt 0.1.0"; }

RunManifest make_manifest(const ExperimentConfig& config, const std::filesystem::path& output_dir,
                          std::string command) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream ts;
    ts << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    return {config, output_dir, std::move(command), std::string(tool_version()), ts.str()};
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    std::ofstream os(path);
    if (!os) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    os << "# run manifest\n"
       << "# version: " << m.version << '\n'
       << "# timestamp: " << m.timestamp << '\n'
       << "# command: " << m.command << '\n'
       << "# output_dir: " << m.output_dir.string() << '\n'
       << format_config(m.config);
    if (!os) {
        throw Error("write failed: " + path.string());
    }
}

}  // namespace shapeopt
