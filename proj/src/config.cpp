#include "kboost/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kboost {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const ConfigEntry& e, const std::string& what) {
    std::ostringstream msg;
    msg << "config error for key '" << e.key << "'";
    if (e.line > 0) msg << " (line " << e.line << ")";
    msg << ": " << what;
    throw std::invalid_argument(msg.str());
}

bool parse_bool(const ConfigEntry& e) {
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(e, "expected a boolean, got '" + e.value + "'");
}

double parse_double(const ConfigEntry& e) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail(e, "expected a number, got '" + e.value + "'");
    }
}

long parse_long(const ConfigEntry& e) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail(e, "expected an integer, got '" + e.value + "'");
    }
}

std::uint64_t parse_u64(const ConfigEntry& e) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail(e, "expected a nonnegative integer, got '" + e.value + "'");
    }
}

std::vector<int> parse_int_list(const ConfigEntry& e) {
    std::vector<int> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            fail(e, "expected a comma-separated integer list, got '" + e.value + "'");
        }
    }
    if (out.empty()) fail(e, "empty list");
    return out;
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
    ConfigFile file;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected 'key = value', got '" + line + "'");
        }
        ConfigEntry entry;
        entry.key = trim(line.substr(0, eq));
        entry.value = trim(line.substr(eq + 1));
        entry.line = lineno;
        if (entry.key.empty()) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": empty key");
        }
        file.entries.push_back(std::move(entry));
    }
    return file;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

void ConfigFile::set(const std::string& key, const std::string& value) {
    entries.push_back(ConfigEntry{key, value, 0});
}

LossKind parse_loss(const std::string& text) {
    if (text == "least_squares" || text == "l2") return LossKind::least_squares;
    if (text == "logistic" || text == "logit") return LossKind::logistic;
    if (text == "exponential" || text == "ada") return LossKind::exponential;
    throw std::invalid_argument("unknown loss '" + text +
                                "' (expected least_squares, logistic, or exponential)");
}

std::vector<RuleSpec> parse_rules_list(const std::string& text) {
    // Split on commas outside parentheses: power(0.67,7) is one item.
    std::vector<RuleSpec> rules;
    std::string item;
    int depth = 0;
    auto flush = [&]() {
        std::string t = trim(item);
        if (!t.empty()) rules.push_back(parse_rule(t));
        item.clear();
    };
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            flush();
        } else {
            item.push_back(c);
        }
    }
    flush();
    if (rules.empty()) throw std::invalid_argument("empty rules list");
    return rules;
}

RunConfig build_run_config(const ConfigFile& file) {
    RunConfig run;
    std::string kernel_name = "sobolev1";
    double bandwidth = 0.0;
    std::string table_path;
    bool kernel_rescale = true;
    int kernel_keys_line = 0;

    for (const ConfigEntry& e : file.entries) {
        const std::string& k = e.key;
        if (k == "mode") {
            if (e.value == "experiment") {
                run.mode = RunMode::experiment;
            } else if (e.value == "trace") {
                run.mode = RunMode::trace;
            } else {
                fail(e, "expected experiment or trace");
            }
        } else if (k == "kernel") {
            kernel_name = e.value;
            kernel_keys_line = e.line;
        } else if (k == "bandwidth") {
            bandwidth = parse_double(e);
        } else if (k == "table") {
            table_path = e.value;
        } else if (k == "kernel_rescale") {
            kernel_rescale = parse_bool(e);
        } else if (k == "loss") {
            try {
                run.experiment.loss = parse_loss(e.value);
            } catch (const std::exception& ex) {
                fail(e, ex.what());
            }
        } else if (k == "n_grid") {
            run.experiment.n_grid = parse_int_list(e);
        } else if (k == "n") {
            run.trace_n = static_cast<int>(parse_long(e));
        } else if (k == "trials") {
            run.experiment.trials = static_cast<int>(parse_long(e));
        } else if (k == "rules") {
            try {
                run.experiment.rules = parse_rules_list(e.value);
            } catch (const std::exception& ex) {
                fail(e, ex.what());
            }
        } else if (k == "alpha") {
            run.experiment.alpha = parse_double(e);
        } else if (k == "noise_sd") {
            run.experiment.noise_sd = parse_double(e);
        } else if (k == "reps") {
            run.experiment.reps = static_cast<int>(parse_long(e));
        } else if (k == "fstar_norm") {
            run.experiment.fstar_norm = parse_double(e);
        } else if (k == "sigma") {
            run.experiment.sigma_override = parse_double(e);
        } else if (k == "rescale_loss") {
            run.experiment.rescale_loss = parse_bool(e);
        } else if (k == "seed") {
            run.experiment.seed = parse_u64(e);
        } else if (k == "max_iter_cap") {
            run.experiment.max_iter_cap = parse_long(e);
        } else if (k == "mc_samples") {
            run.experiment.mc_samples = parse_long(e);
        } else if (k == "jobs") {
            run.experiment.jobs = static_cast<int>(parse_long(e));
        } else if (k == "timing") {
            run.experiment.timing = parse_bool(e);
        } else if (k == "iterations") {
            run.iterations = parse_long(e);
        } else if (k == "out") {
            run.out = e.value;
        } else {
            fail(e, "unknown config key '" + k + "'");
        }
    }

    try {
        if (kernel_name == "sobolev1") {
            run.experiment.kernel = KernelSpec::sobolev1(kernel_rescale);
        } else if (kernel_name == "gaussian") {
            run.experiment.kernel = KernelSpec::gaussian(bandwidth, kernel_rescale);
        } else if (kernel_name == "tabulated") {
            run.experiment.kernel = KernelSpec::tabulated_from_file(table_path, kernel_rescale);
        } else {
            throw std::invalid_argument("unknown kernel '" + kernel_name +
                                        "' (expected sobolev1, gaussian, or tabulated)");
        }
    } catch (const std::exception& ex) {
        ConfigEntry e{"kernel", kernel_name, kernel_keys_line};
        fail(e, ex.what());
    }
    return run;
}

}  // namespace kboost
