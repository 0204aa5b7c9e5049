#include "idsm/config.hpp"

#include "idsm/errors.hpp"
#include "idsm/io.hpp"

#include <map>
#include <set>
#include <sstream>

namespace idsm {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> words(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

class Table {
public:
    explicit Table(std::string_view text) {
        std::size_t line_no = 0, start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            ++line_no;
            const std::string line = trim(text.substr(start, end - start));
            start = end + 1;
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
            std::string key = trim(std::string_view(line).substr(0, eq));
            std::string value = trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            if (!values_.emplace(key, value).second)
                throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    std::string required(const std::string& key) {
        used_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
        return it->second;
    }
    double num(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return to_double(key, str(key, ""));
    }
    static double to_double(const std::string& key, const std::string& v) {
        try {
            return parse_double(v, key);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
    long integer(const std::string& key, long fallback) {
        if (!has(key)) return fallback;
        const std::string v = str(key, "");
        try {
            std::size_t pos = 0;
            const long r = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError("config: " + key + ": expected an integer, got '" + v + "'");
        }
    }
    std::vector<double> list(const std::string& key) {
        std::vector<double> out;
        for (const auto& w : words(str(key, ""))) out.push_back(to_double(key, w));
        return out;
    }
    void check_all_used() const {
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) throw ConfigError("config: unknown key '" + k + "'");
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
    return s;
}

}  // namespace

std::string format_shape(const Shape& s) {
    std::string out = s.kind == Shape::Kind::square ? "square" : "circle";
    out += " " + format_double(s.center.x) + " " + format_double(s.center.y) + " " + format_double(s.size);
    for (double v : s.values) out += " " + format_double(v);
    return out;
}

Shape parse_shape(std::string_view text) {
    const auto w = words(text);
    if (w.size() < 5) throw ConfigError("shape '" + std::string(text) + "': expected 'square|circle cx cy size v0 [v1]'");
    Shape s;
    if (w[0] == "square") s.kind = Shape::Kind::square;
    else if (w[0] == "circle") s.kind = Shape::Kind::circle;
    else throw ConfigError("shape: unknown kind '" + w[0] + "'");
    s.center = {Table::to_double("shape", w[1]), Table::to_double("shape", w[2])};
    s.size = Table::to_double("shape", w[3]);
    for (std::size_t i = 4; i < w.size(); ++i) s.values.push_back(Table::to_double("shape", w[i]));
    return s;
}

void ExperimentConfig::validate() const {
    model.validate();
    domain.validate();
    fine_domain().validate();
    if (!(h_fine <= domain.edge_length / 2.0)) throw ConfigError("config: mesh.h_fine must be at most mesh.h / 2");
    truth.validate_in_domain(domain, domain.edge_length, model.channel_count());
    if (sources.empty()) throw ConfigError("config: at least one source is required");
    if (!(epsilon >= 0.0)) throw ConfigError("config: noise.epsilon must be non-negative");
    idsm.validate(model.channel_count());
    if (!(dsm_gamma >= 0.0)) throw ConfigError("config: dsm.gamma must be non-negative");
    if (output_dir.empty()) throw ConfigError("config: output.dir is empty");
    for (const auto& s : source_specs()) (void)s;
}

std::vector<SourceSpec> ExperimentConfig::source_specs() const {
    std::vector<SourceSpec> out;
    for (const auto& s : sources) {
        try {
            out.push_back(SourceSpec::for_model(model, s));
        } catch (const ParseError& e) {
            throw ConfigError(std::string("config: source: ") + e.what());
        }
    }
    return out;
}

ExperimentConfig parse_config(std::string_view text) {
    Table t(text);
    ExperimentConfig c;
    c.model.kind = parse_model_kind(t.required("model.kind"));
    c.model.sigma0 = t.num("model.sigma0", c.model.sigma0);
    c.model.sigma_inclusion = t.num("model.sigma_inclusion", c.model.sigma_inclusion);
    c.domain.semi_axis_a = t.num("domain.a", c.domain.semi_axis_a);
    c.domain.semi_axis_b = t.num("domain.b", c.domain.semi_axis_b);
    c.domain.edge_length = t.num("mesh.h", c.domain.edge_length);
    c.h_fine = t.num("mesh.h_fine", c.domain.edge_length / 2.0);

    const long shapes = t.integer("truth.count", 0);
    if (shapes < 0) throw ConfigError("config: truth.count must be non-negative");
    for (long i = 0; i < shapes; ++i) c.truth.shapes.push_back(parse_shape(t.required("truth.shape." + std::to_string(i))));
    const long nsrc = t.integer("sources.count", 0);
    if (nsrc < 0) throw ConfigError("config: sources.count must be non-negative");
    for (long i = 0; i < nsrc; ++i) c.sources.push_back(t.required("sources." + std::to_string(i)));

    c.epsilon = t.num("noise.epsilon", 0.0);
    if (t.has("noise.seed")) {
        const std::string v = t.str("noise.seed", "");
        try {
            c.seed = parse_u64(v, "noise.seed");
        } catch (const ParseError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }

    c.idsm.alpha = t.num("idsm.alpha", c.idsm.alpha);
    c.idsm.iterations = static_cast<int>(t.integer("idsm.iterations", c.idsm.iterations));
    c.idsm.correction = parse_correction_kind(t.str("idsm.correction", "dfp"));
    c.idsm.resolver = parse_resolver_init(t.str("idsm.resolver", "distance_power"));
    c.idsm.gamma = t.num("idsm.gamma", c.idsm.gamma);
    c.idsm.curvature_threshold = t.num("idsm.curvature_threshold", c.idsm.curvature_threshold);

    c.idsm.projection = ProjectionRule::default_for(c.model);
    const std::string pk = t.str("projection.kind", "");
    if (pk == "box_clamp") c.idsm.projection.kind = ProjectionRule::Kind::box_clamp;
    else if (pk == "relaxed_normalize") c.idsm.projection.kind = ProjectionRule::Kind::relaxed_normalize;
    else if (!pk.empty()) throw ConfigError("config: unknown projection.kind '" + pk + "'");
    if (t.has("projection.lower")) c.idsm.projection.lower = t.list("projection.lower");
    if (t.has("projection.upper")) c.idsm.projection.upper = t.list("projection.upper");
    c.idsm.projection.keep = t.num("projection.keep", c.idsm.projection.keep);

    c.dsm_gamma = t.num("dsm.gamma", c.dsm_gamma);
    c.output_dir = t.str("output.dir", c.output_dir);
    t.check_all_used();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& c) {
    std::string o;
    auto kv = [&](const std::string& k, const std::string& v) { o += k + " = " + v + "\n"; };
    kv("model.kind", std::string(model_kind_name(c.model.kind)));
    kv("model.sigma0", format_double(c.model.sigma0));
    kv("model.sigma_inclusion", format_double(c.model.sigma_inclusion));
    kv("domain.a", format_double(c.domain.semi_axis_a));
    kv("domain.b", format_double(c.domain.semi_axis_b));
    kv("mesh.h", format_double(c.domain.edge_length));
    kv("mesh.h_fine", format_double(c.h_fine));
    kv("truth.count", std::to_string(c.truth.shapes.size()));
    for (std::size_t i = 0; i < c.truth.shapes.size(); ++i) kv("truth.shape." + std::to_string(i), format_shape(c.truth.shapes[i]));
    kv("sources.count", std::to_string(c.sources.size()));
    for (std::size_t i = 0; i < c.sources.size(); ++i) kv("sources." + std::to_string(i), c.sources[i]);
    kv("noise.epsilon", format_double(c.epsilon));
    kv("noise.seed", std::to_string(c.seed));
    kv("idsm.alpha", format_double(c.idsm.alpha));
    kv("idsm.iterations", std::to_string(c.idsm.iterations));
    kv("idsm.correction", std::string(correction_kind_name(c.idsm.correction)));
    kv("idsm.resolver", std::string(resolver_init_name(c.idsm.resolver)));
    kv("idsm.gamma", format_double(c.idsm.gamma));
    kv("idsm.curvature_threshold", format_double(c.idsm.curvature_threshold));
    const auto& p = c.idsm.projection;
    if (p.kind == ProjectionRule::Kind::box_clamp) {
        kv("projection.kind", "box_clamp");
        kv("projection.lower", join(p.lower));
        kv("projection.upper", join(p.upper));
    } else {
        kv("projection.kind", "relaxed_normalize");
        kv("projection.keep", format_double(p.keep));
    }
    kv("dsm.gamma", format_double(c.dsm_gamma));
    kv("output.dir", c.output_dir);
    return o;
}

}  // namespace idsm
