#include "subsel/config.hpp"

#include "subsel/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace subsel {

namespace {

std::string trimmed(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    auto out = s.substr(first, last - first + 1);
    if (out.size() >= 2 && (out.front() == '"' || out.front() == '\'') && out.back() == out.front()) {
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw Error(ErrorCode::InvalidConfig, "invalid value '" + value + "' for " + key);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
    return out;
}

bool parse_flag(const std::string& key, const std::string& value) {
    if (value == "true" || value == "TRUE" || value == "1") return true;
    if (value == "false" || value == "FALSE" || value == "0") return false;
    bad_value(key, value);
}

} // namespace

void validate_config(const RunConfig& c) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (c.npop < 2) fail("npop must be at least 2");
    if (c.nelite < 1 || c.nelite >= c.npop) fail("nelite must satisfy 1 <= nelite < npop");
    if (!(c.mutprob >= 0.0 && c.mutprob <= 1.0)) fail("mutprob must lie in [0, 1]");
    if (!(c.mutintensity >= 0.0) || !std::isfinite(c.mutintensity)) fail("mutintensity must be >= 0");
    if (c.niterations < 1) fail("niterations must be at least 1");
    if (c.minitbefstop < 1) fail("minitbefstop must be at least 1");
    if (!(c.lambda > 0.0) || !std::isfinite(c.lambda)) fail("lambda must be positive");
    if (!(c.tolconv > 0.0) || !std::isfinite(c.tolconv)) fail("tolconv must be positive");
    if (c.workers < 1) fail("workers must be at least 1");
}

void set_config_field(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "npop") c.npop = parse_count(key, value);
    else if (key == "nelite") c.nelite = parse_count(key, value);
    else if (key == "keepbest") c.keepbest = parse_flag(key, value);
    else if (key == "tabu") c.tabu = parse_flag(key, value);
    else if (key == "tabumemsize") c.tabumemsize = parse_count(key, value);
    else if (key == "mutprob") c.mutprob = parse_real(key, value);
    else if (key == "mutintensity") c.mutintensity = parse_real(key, value);
    else if (key == "niterations") c.niterations = parse_count(key, value);
    else if (key == "minitbefstop") c.minitbefstop = parse_count(key, value);
    else if (key == "niterreg") c.niterreg = parse_count(key, value);
    else if (key == "lambda") c.lambda = parse_real(key, value);
    else if (key == "tolconv") c.tolconv = parse_real(key, value);
    else if (key == "workers") c.workers = parse_count(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& config, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trimmed(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line_no) + ": expected key = value");
        }
        set_config_field(config, trimmed(line.substr(0, eq)), trimmed(line.substr(eq + 1)));
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(config, buffer.str());
}

} // namespace subsel
