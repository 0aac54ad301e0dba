#include "boolperc/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace boolperc {

namespace {

class ValueParser {
public:
    ValueParser(const std::string& s, int line) : s_(s), line_(line) {}

    nlohmann::json parse_all() {
        nlohmann::json v = value();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigInvalid("config line " + std::to_string(line_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string key() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                    s_[pos_] == '-' || s_[pos_] == '.'))
            ++pos_;
        if (start == pos_) fail("expected a key");
        return s_.substr(start, pos_ - start);
    }

    nlohmann::json value() {
        skip_ws();
        if (pos_ >= s_.size()) fail("missing value");
        const char c = s_[pos_];
        if (c == '"') return string();
        if (c == '[') {
            ++pos_;
            nlohmann::json arr = nlohmann::json::array();
            if (eat(']')) return arr;
            do {
                arr.push_back(value());
            } while (eat(','));
            if (!eat(']')) fail("expected ']'");
            return arr;
        }
        if (c == '{') {
            ++pos_;
            nlohmann::json obj = nlohmann::json::object();
            if (eat('}')) return obj;
            do {
                const std::string k = key();
                if (!eat('=')) fail("expected '=' in inline table");
                obj[k] = value();
            } while (eat(','));
            if (!eat('}')) fail("expected '}'");
            return obj;
        }
        if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        return number();
    }

    nlohmann::json string() {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
            out += s_[pos_++];
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    nlohmann::json number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                    s_[pos_] == '-' || s_[pos_] == '+' || s_[pos_] == '_'))
            ++pos_;
        std::string tok = s_.substr(start, pos_ - start);
        std::erase(tok, '_');
        if (tok.empty()) fail("expected a value");
        const bool integral = tok.find_first_of(".eEn") == std::string::npos;  // n: nan / inf
        try {
            std::size_t used = 0;
            if (integral) {
                if (tok[0] == '-') {
                    const long long v = std::stoll(tok, &used);
                    if (used == tok.size()) return v;
                } else {
                    const unsigned long long v = std::stoull(tok, &used);
                    if (used == tok.size()) return v;
                }
            }
            const double v = std::stod(tok, &used);
            if (used == tok.size()) return v;
        } catch (const std::exception&) {
        }
        fail("cannot parse value '" + tok + "'");
    }

    const std::string& s_;
    int line_;
    std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

nlohmann::json parse_config_text(const std::string& text) {
    nlohmann::json out = nlohmann::json::object();
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[' && s.back() == ']' && s.find('=') == std::string::npos) {
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigInvalid("config line " + std::to_string(line) + ": expected key = value");
        std::string k = trim(s.substr(0, eq));
        if (k.empty()) throw ConfigInvalid("config line " + std::to_string(line) + ": empty key");
        if (!section.empty()) k = section + "." + k;
        const std::string rhs = s.substr(eq + 1);
        out[k] = ValueParser(rhs, line).parse_all();
    }
    return out;
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void RunConfig::overlay(const nlohmann::json& layer) {
    for (auto it = layer.begin(); it != layer.end(); ++it) {
        if (!it.value().is_null()) v_[it.key()] = it.value();
    }
}

int RunConfig::d() const {
    const int d = get<int>("d", 2);
    if (d < 1 || d > kMaxDim) throw ConfigInvalid("d must lie in [1, 4]");
    return d;
}

RadiusMeasure RunConfig::measure() const {
    nlohmann::json m;
    if (has("measure") && v_.at("measure").is_object()) {
        m = v_.at("measure");
    } else {
        m["kind"] = get<std::string>("measure", "powerlaw");
        for (const char* k : {"delta", "cutoff", "radius"})
            if (has(k)) m[k] = v_.at(k);
    }
    try {
        return RadiusMeasure::from_json(m, d());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("measure: ") + e.what());
    } catch (const DivergentMoment&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigInvalid(std::string("measure: ") + e.what());
    }
}

EventSpec RunConfig::event() const {
    nlohmann::json e;
    if (has("event") && v_.at("event").is_object()) {
        e = v_.at("event");
    } else {
        e["kind"] = require<std::string>("event");
        for (const char* k : {"n", "N", "rho", "k", "K", "r", "inner", "outer", "threshold", "slab_k", "delta"})
            if (has(k)) e[k] = v_.at(k);
    }
    try {
        return EventSpec::from_json(e, d());
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigInvalid(std::string("event: ") + ex.what());
    } catch (const std::invalid_argument& ex) {
        throw ConfigInvalid(std::string("event: ") + ex.what());
    }
}

std::uint64_t RunConfig::seed() const {
    if (has("seed")) return convert<std::uint64_t>("seed");
    if (const char* env = std::getenv("BOOLPERC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigInvalid("BOOLPERC_SEED is not an unsigned integer");
        }
    }
    return 1;
}

}  // namespace boolperc
