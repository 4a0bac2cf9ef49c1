#include "strataflow/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "strataflow/error.hpp"

namespace strataflow {

namespace fs = std::filesystem;

bool RunConfig::operator==(const RunConfig& o) const {
    return g == o.g && c == o.c && p0 == o.p0 && rho == o.rho && beta == o.beta && floor == o.floor && Nq == o.Nq &&
           Np == o.Np && sturm_np == o.sturm_np && sweep_points == o.sweep_points && lambda_hi == o.lambda_hi &&
           newton_rtol == o.newton_rtol && newton_steptol == o.newton_steptol &&
           newton_max_iter == o.newton_max_iter && laminar_rtol == o.laminar_rtol && steps == o.steps &&
           ds == o.ds && ds_min == o.ds_min && ds_max == o.ds_max && s0 == o.s0 && direction == o.direction &&
           delta == o.delta && snapshot_every == o.snapshot_every && threads == o.threads && output == o.output &&
           force == o.force;
}

namespace {

[[noreturn]] void parse_fail(int line, int col, const std::string& msg) {
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": " << msg;
    fail(ErrorCode::ParseError, os.str());
}

struct Cursor {
    const std::string& s;
    std::size_t pos;
    int line;
    std::size_t line_start;  // offset of the line within the text

    int col() const { return int(pos - line_start) + 1; }
    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool at_end() const { return pos >= s.size(); }
};

double parse_real(Cursor& c) {
    c.skip_ws();
    const char* b = c.s.data() + c.pos;
    const char* e = c.s.data() + c.s.size();
    if (b < e && *b == '+') ++b;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr == b) parse_fail(c.line, c.col(), "expected a real number");
    if (!std::isfinite(v)) parse_fail(c.line, c.col(), "real number must be finite");
    c.pos = std::size_t(ptr - c.s.data());
    return v;
}

void expect_end(Cursor& c) {
    c.skip_ws();
    if (!c.at_end()) parse_fail(c.line, c.col(), "unexpected trailing text");
}

double real_value(Cursor& c) {
    double v = parse_real(c);
    expect_end(c);
    return v;
}

int int_value(Cursor& c) {
    c.skip_ws();
    const char* b = c.s.data() + c.pos;
    const char* e = c.s.data() + c.s.size();
    if (b < e && *b == '+') ++b;
    int v = 0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr == b) parse_fail(c.line, c.col(), "expected an integer");
    c.pos = std::size_t(ptr - c.s.data());
    expect_end(c);
    return v;
}

std::string word_value(Cursor& c) {
    c.skip_ws();
    std::size_t b = c.pos;
    while (!c.at_end() && c.s[c.pos] != ' ' && c.s[c.pos] != '\t') ++c.pos;
    if (c.pos == b) parse_fail(c.line, c.col(), "expected a value");
    std::string w = c.s.substr(b, c.pos - b);
    expect_end(c);
    return w;
}

ProfileSpec profile_value(Cursor& c) {
    c.skip_ws();
    std::size_t b = c.pos;
    while (!c.at_end() && std::isalpha(static_cast<unsigned char>(c.s[c.pos]))) ++c.pos;
    std::string kind = c.s.substr(b, c.pos - b);
    if (kind != "poly" && kind != "table") {
        c.pos = b;
        parse_fail(c.line, c.col(), "expected poly(...) or table(...)");
    }
    c.skip_ws();
    if (c.at_end() || c.s[c.pos] != '(') parse_fail(c.line, c.col(), "expected '('");
    const int open_col = c.col();
    ++c.pos;
    ProfileSpec spec;
    if (kind == "poly") {
        spec.kind = ProfileSpec::Kind::Poly;
        c.skip_ws();
        if (c.at_end()) parse_fail(c.line, open_col, "unclosed '('");
        for (;;) {
            spec.coeffs.push_back(parse_real(c));
            c.skip_ws();
            if (c.at_end()) parse_fail(c.line, open_col, "unclosed '('");
            if (c.s[c.pos] == ',') {
                ++c.pos;
                continue;
            }
            if (c.s[c.pos] == ')') {
                ++c.pos;
                break;
            }
            parse_fail(c.line, c.col(), "expected ',' or ')'");
        }
    } else {
        spec.kind = ProfileSpec::Kind::Table;
        std::size_t close = c.s.find(')', c.pos);
        if (close == std::string::npos) parse_fail(c.line, open_col, "unclosed '('");
        std::string path = c.s.substr(c.pos, close - c.pos);
        auto trim_b = path.find_first_not_of(" \t");
        auto trim_e = path.find_last_not_of(" \t");
        if (trim_b == std::string::npos) parse_fail(c.line, c.col(), "empty table path");
        spec.path = path.substr(trim_b, trim_e - trim_b + 1);
        c.pos = close + 1;
    }
    expect_end(c);
    return spec;
}

void validate(const RunConfig& r) {
    auto bad = [](const std::string& m) { fail(ErrorCode::InvalidArgument, m); };
    if (!(r.g > 0)) bad("g must be positive");
    if (!(r.c > 0)) bad("c must be positive");
    if (!(r.p0 < 0)) bad("p0 must be negative");
    if (r.Nq < 16 || r.Np < 16) bad("Nq and Np must be at least 16");
    if (r.sturm_np < 16) bad("sturm_np must be at least 16");
    if (r.sweep_points < 8) bad("sweep_points must be at least 8");
    if (!(r.newton_rtol > 0) || !(r.newton_steptol > 0) || !(r.laminar_rtol > 0)) bad("tolerances must be positive");
    if (r.newton_max_iter < 1) bad("newton_max_iter must be positive");
    if (r.steps < 0) bad("steps must be nonnegative");
    if (r.ds < 0 || r.ds_min < 0 || r.ds_max < 0 || r.s0 < 0 || r.delta < 0 || r.lambda_hi < 0)
        bad("step controls must be nonnegative");
    if (r.direction != 1 && r.direction != -1) bad("direction must be + or -");
    if (r.snapshot_every < 1) bad("snapshot_every must be positive");
    if (r.threads < 0) bad("threads must be nonnegative");
    if (r.rho.kind == ProfileSpec::Kind::Poly && r.rho.coeffs.empty()) bad("rho needs coefficients");
    if (r.beta.kind == ProfileSpec::Kind::Poly && r.beta.coeffs.empty()) bad("beta needs coefficients");
}

std::string real_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string profile_text(const ProfileSpec& p) {
    if (p.kind == ProfileSpec::Kind::Table) return "table(" + p.path + ")";
    std::string s = "poly(";
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) s += (i ? ", " : "") + real_text(p.coeffs[i]);
    return s + ")";
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    RunConfig r;
    r.base_dir = base_dir;
    std::size_t start = 0;
    int line = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line;
        std::string ln = text.substr(start, end - start);
        if (!ln.empty() && ln.back() == '\r') ln.pop_back();
        auto hash = ln.find('#');
        if (hash != std::string::npos) ln.erase(hash);
        Cursor c{ln, 0, line, 0};
        c.skip_ws();
        if (!c.at_end()) {
            std::size_t kb = c.pos;
            while (!c.at_end() && (std::isalnum(static_cast<unsigned char>(ln[c.pos])) || ln[c.pos] == '_')) ++c.pos;
            std::string key = ln.substr(kb, c.pos - kb);
            const int key_col = int(kb) + 1;
            if (key.empty()) parse_fail(line, key_col, "expected a key");
            c.skip_ws();
            if (c.at_end() || ln[c.pos] != '=') parse_fail(line, c.col(), "expected '='");
            ++c.pos;
            if (key == "g") r.g = real_value(c);
            else if (key == "c") r.c = real_value(c);
            else if (key == "p0") r.p0 = real_value(c);
            else if (key == "rho") r.rho = profile_value(c);
            else if (key == "beta") r.beta = profile_value(c);
            else if (key == "floor") {
                std::string w = word_value(c);
                if (w == "strict") r.floor = FloorMode::Strict;
                else if (w == "relaxed") r.floor = FloorMode::Relaxed;
                else parse_fail(line, key_col, "floor must be strict or relaxed");
            } else if (key == "Nq") r.Nq = int_value(c);
            else if (key == "Np") r.Np = int_value(c);
            else if (key == "sturm_np") r.sturm_np = int_value(c);
            else if (key == "sweep_points") r.sweep_points = int_value(c);
            else if (key == "lambda_hi") r.lambda_hi = real_value(c);
            else if (key == "newton_rtol") r.newton_rtol = real_value(c);
            else if (key == "newton_steptol") r.newton_steptol = real_value(c);
            else if (key == "newton_max_iter") r.newton_max_iter = int_value(c);
            else if (key == "laminar_rtol") r.laminar_rtol = real_value(c);
            else if (key == "steps") r.steps = int_value(c);
            else if (key == "ds") r.ds = real_value(c);
            else if (key == "ds_min") r.ds_min = real_value(c);
            else if (key == "ds_max") r.ds_max = real_value(c);
            else if (key == "s0") r.s0 = real_value(c);
            else if (key == "direction") {
                std::string w = word_value(c);
                if (w == "+" || w == "1" || w == "+1") r.direction = 1;
                else if (w == "-" || w == "-1") r.direction = -1;
                else parse_fail(line, key_col, "direction must be + or -");
            } else if (key == "delta") r.delta = real_value(c);
            else if (key == "snapshot_every") r.snapshot_every = int_value(c);
            else if (key == "threads") r.threads = int_value(c);
            else if (key == "output") r.output = word_value(c);
            else if (key == "force") {
                std::string w = word_value(c);
                if (w == "true") r.force = true;
                else if (w == "false") r.force = false;
                else parse_fail(line, key_col, "force must be true or false");
            } else parse_fail(line, key_col, "unknown key '" + key + "'");
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    validate(r);
    return r;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    fs::path p(path);
    return parse_config(ss.str(), p.has_parent_path() ? p.parent_path().string() : ".");
}

std::string serialize_config(const RunConfig& r) {
    std::ostringstream os;
    os << "g = " << real_text(r.g) << "\n";
    os << "c = " << real_text(r.c) << "\n";
    os << "p0 = " << real_text(r.p0) << "\n";
    os << "rho = " << profile_text(r.rho) << "\n";
    os << "beta = " << profile_text(r.beta) << "\n";
    os << "floor = " << (r.floor == FloorMode::Strict ? "strict" : "relaxed") << "\n";
    os << "Nq = " << r.Nq << "\n";
    os << "Np = " << r.Np << "\n";
    os << "sturm_np = " << r.sturm_np << "\n";
    os << "sweep_points = " << r.sweep_points << "\n";
    os << "lambda_hi = " << real_text(r.lambda_hi) << "\n";
    os << "newton_rtol = " << real_text(r.newton_rtol) << "\n";
    os << "newton_steptol = " << real_text(r.newton_steptol) << "\n";
    os << "newton_max_iter = " << r.newton_max_iter << "\n";
    os << "laminar_rtol = " << real_text(r.laminar_rtol) << "\n";
    os << "steps = " << r.steps << "\n";
    os << "ds = " << real_text(r.ds) << "\n";
    os << "ds_min = " << real_text(r.ds_min) << "\n";
    os << "ds_max = " << real_text(r.ds_max) << "\n";
    os << "s0 = " << real_text(r.s0) << "\n";
    os << "direction = " << (r.direction > 0 ? "+" : "-") << "\n";
    os << "delta = " << real_text(r.delta) << "\n";
    os << "snapshot_every = " << r.snapshot_every << "\n";
    os << "threads = " << r.threads << "\n";
    os << "output = " << r.output << "\n";
    os << "force = " << (r.force ? "true" : "false") << "\n";
    return os.str();
}

Profile1D load_profile(const ProfileSpec& spec, const std::string& base_dir) {
    if (spec.kind == ProfileSpec::Kind::Poly) return Profile1D::poly(spec.coeffs);
    fs::path p(spec.path);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    std::ifstream in(p);
    if (!in) fail(ErrorCode::IoError, "cannot read table " + p.string());
    std::vector<double> xs, ys;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
            continue;
        auto comma = line.find(',');
        double x = 0, y = 0;
        bool ok = comma != std::string::npos;
        if (ok) {
            std::string a = line.substr(0, comma), b = line.substr(comma + 1);
            auto num = [&](const std::string& t, double& v) {
                auto f = t.find_first_not_of(" \t");
                auto l = t.find_last_not_of(" \t");
                if (f == std::string::npos) return false;
                auto [ptr, ec] = std::from_chars(t.data() + f, t.data() + l + 1, v);
                return ec == std::errc() && ptr == t.data() + l + 1;
            };
            ok = num(a, x) && num(b, y);
        }
        if (!ok) {
            if (xs.empty() && n == 1) continue;  // header row
            std::ostringstream os;
            os << p.string() << ": line " << n << ": expected two numeric columns";
            fail(ErrorCode::ParseError, os.str());
        }
        xs.push_back(x);
        ys.push_back(y);
    }
    return Profile1D::table(xs, ys);
}

ProfileBundle make_bundle(const RunConfig& cfg) {
    FlowParams fp;
    fp.g = cfg.g;
    fp.c = cfg.c;
    fp.p0 = cfg.p0;
    return ProfileBundle(fp, load_profile(cfg.rho, cfg.base_dir), load_profile(cfg.beta, cfg.base_dir), cfg.floor);
}

RunConfig with_absolute_paths(const RunConfig& cfg) {
    RunConfig r = cfg;
    for (ProfileSpec* s : {&r.rho, &r.beta}) {
        if (s->kind != ProfileSpec::Kind::Table) continue;
        fs::path p(s->path);
        if (p.is_relative()) p = fs::absolute(fs::path(cfg.base_dir.empty() ? "." : cfg.base_dir) / p);
        s->path = p.lexically_normal().string();
    }
    return r;
}

}  // namespace strataflow
