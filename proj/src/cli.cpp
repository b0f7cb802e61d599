#include "epj/cli.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "epj/format.hpp"

namespace epj::cli {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view text)
{
    text = trim(text);
    double x = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(x))
        throw ConfigError("'" + std::string(key) + "': not a finite number: '" + std::string(text) + "'");
    return x;
}

int parse_int(std::string_view key, std::string_view text)
{
    text = trim(text);
    int x = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError("'" + std::string(key) + "': not an integer: '" + std::string(text) + "'");
    return x;
}

std::vector<double> parse_list(std::string_view key, std::string_view text)
{
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        out.push_back(parse_double(key, text.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    if (out.empty()) throw ConfigError("'" + std::string(key) + "': empty list");
    return out;
}

double tolerance(const RunConfig& cfg, const std::string& name, double fallback)
{
    if (auto it = cfg.tolerances.find(name); it != cfg.tolerances.end()) return it->second;
    if (auto it = cfg.tolerances.find("all"); it != cfg.tolerances.end()) return it->second;
    return fallback;
}

struct Checks {
    const RunConfig& cfg;
    std::vector<CheckResult> results;

    void add(const std::string& name, double residual, double fallback_tol)
    {
        const double tol = tolerance(cfg, name, fallback_tol);
        results.push_back({name, residual, tol, residual <= tol, {}});
    }
    void skip(const std::string& name, const std::string& why) { results.push_back({name, 0.0, 0.0, true, why}); }
};

std::optional<EpCertificate> first_ep(const RunConfig& cfg)
{
    const auto eps = ep_search(cfg.model, cfg.free_param, cfg.ep_lo, cfg.ep_hi, cfg.ep_steps);
    return eps.front();
}

EpCertificate require_ep(const RunConfig& cfg) { return *first_ep(cfg); }

Json check_to_json(const CheckResult& r)
{
    Json j{{"name", r.name}, {"residual", std::isfinite(r.residual) ? Json(r.residual) : Json(nullptr)},
           {"tolerance", r.tolerance}, {"pass", r.passed}};
    if (!r.skipped.empty()) j["skipped"] = r.skipped;
    return j;
}

void write_vector_rows(std::ostream& os, const std::string& name, const VectorXc& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        os << name << ',' << i << ',' << format_double(v(i).real()) << ',' << format_double(v(i).imag()) << '\n';
}

void write_matrix_rows(std::ostream& os, const std::string& name, const MatrixXc& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            os << name << ',' << r * m.cols() + c << ',' << format_double(m(r, c).real()) << ','
               << format_double(m(r, c).imag()) << '\n';
}

void write_ep_csv(std::ostream& os, const std::vector<EpCertificate>& eps)
{
    os << "free_param,kappa_star,re_z0,im_z0,sheet,f_residual,df_residual,selforth_residual,iterations\n";
    for (const auto& ep : eps) {
        os << to_string(ep.free_param) << ',' << format_double(get_param(ep.kappa_star, ep.free_param)) << ','
           << format_double(ep.z0.real()) << ',' << format_double(ep.z0.imag()) << ',' << to_string(ep.sheet) << ','
           << format_double(ep.f_residual) << ',' << format_double(ep.df_residual) << ','
           << format_double(ep.selforth_residual) << ',' << ep.iterations << '\n';
    }
}

void emit(const std::string& command, const RunConfig& cfg, Format fmt, std::ostream& os, int& code)
{
    if (command == "scan") {
        const auto rows = run_scan(cfg, scan_threads());
        if (fmt == Format::Csv) write_scan_csv(os, rows);
        else os << Json{{"free_param", to_string(cfg.free_param)}, {"rows", to_json(rows)}}.dump(2) << '\n';
    } else if (command == "find-ep") {
        const auto eps = ep_search(cfg.model, cfg.free_param, cfg.ep_lo, cfg.ep_hi, cfg.ep_steps);
        if (fmt == Format::Csv) {
            write_ep_csv(os, eps);
        } else {
            Json arr = Json::array();
            for (const auto& ep : eps) arr.push_back(to_json(ep));
            os << Json{{"exceptional_points", arr}}.dump(2) << '\n';
        }
    } else if (command == "jordan") {
        const auto ep = require_ep(cfg);
        const auto jb = build_jordan(ep, cfg.c);
        if (fmt == Format::Csv) {
            os << "quantity,index,re,im\n";
            write_vector_rows(os, "phi0_p", jb.phi0_p);
            write_vector_rows(os, "psphi0_p", jb.psphi0_p);
            write_vector_rows(os, "tphi0_p", jb.tphi0_p);
            write_vector_rows(os, "tpsphi0_p", jb.tpsphi0_p);
            write_matrix_rows(os, "gram", jb.gram);
            write_matrix_rows(os, "block", jb.block);
            write_matrix_rows(os, "p0_h_p0", p0_h_p0(jb));
        } else {
            os << Json{{"ep", to_json(ep)}, {"jordan", to_json(jb)}}.dump(2) << '\n';
        }
    } else if (command == "extended") {
        const auto ep = require_ep(cfg);
        const auto report = limit_to_ep(ep, cfg.eps_list, cfg.c);
        if (fmt == Format::Csv) write_convergence_csv(os, report);
        else os << Json{{"ep", to_json(ep)}, {"convergence", to_json(report)}}.dump(2) << '\n';
    } else if (command == "puiseux") {
        const auto ep = require_ep(cfg);
        const auto samples = scan_bifurcation(ep, cfg.puiseux_eps);
        if (fmt == Format::Csv) {
            write_bifurcation_csv(os, samples);
        } else {
            const auto fit = fit_puiseux(samples);
            const auto dq = difference_quotient_pseudovector(ep, cfg.quotient_eps, cfg.c);
            Json arr = Json::array();
            for (const auto& s : samples)
                arr.push_back({{"eps", s.eps}, {"z_plus", to_json(s.plus.z)}, {"z_minus", to_json(s.minus.z)}});
            Json j{{"ep", to_json(ep)},
                   {"fit", to_json(fit)},
                   {"samples", arr},
                   {"perturbation_overlap", perturbation_overlap(ep)},
                   {"difference_quotient",
                    {{"phi0_p", to_json(dq.phi0_p)},
                     {"psphi0_p", to_json(dq.psphi0_p)},
                     {"n2", to_json(dq.n2)},
                     {"extrapolation_change", dq.extrapolation_change}}}};
            if (ep.kappa_star.dim() > 1) j["vector_slope"] = vector_puiseux_slope(samples);
            os << j.dump(2) << '\n';
        }
    } else if (command == "verify") {
        const auto checks = run_verify(cfg);
        bool all = true;
        for (const auto& c : checks) all = all && c.passed;
        if (fmt == Format::Csv) {
            os << "name,residual,tolerance,status\n";
            for (const auto& c : checks)
                os << c.name << ',' << format_double(c.residual) << ',' << format_double(c.tolerance) << ','
                   << (!c.skipped.empty() ? "skipped" : c.passed ? "pass" : "fail") << '\n';
        } else {
            Json arr = Json::array();
            for (const auto& c : checks) arr.push_back(check_to_json(c));
            os << Json{{"checks", arr}, {"passed", all}}.dump(2) << '\n';
        }
        code = all ? kOk : kVerifyFailed;
    }
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message)
{
    err << Json{{"error", kind}, {"message", message}}.dump() << '\n';
}

} // namespace

Complex parse_complex(std::string_view text)
{
    const std::string_view t = trim(text);
    if (t.empty()) throw ConfigError("empty complex number");
    if (const auto comma = t.find(','); comma != std::string_view::npos)
        return {parse_double("c", t.substr(0, comma)), parse_double("c", t.substr(comma + 1))};
    if (t.back() != 'i') return {parse_double("c", t), 0.0};

    const std::string_view body = t.substr(0, t.size() - 1);
    // split at the last sign that is not the leading one or part of an exponent
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag_part = [](std::string_view s) {
        if (s.empty() || s == "+") return 1.0;
        if (s == "-") return -1.0;
        if (s.front() == '+') s.remove_prefix(1);
        return parse_double("c", s);
    };
    if (split == std::string_view::npos) return {0.0, imag_part(body)};
    return {parse_double("c", body.substr(0, split)), imag_part(body.substr(split))};
}

void apply_setting(RunConfig& cfg, std::string_view key_in, std::string_view value_in)
{
    const std::string key(trim(key_in));
    const std::string_view value = trim(value_in);
    if (key == "model") {
        if (value == "one" || value == "1") cfg.model.kind = ModelKind::OneLevel;
        else if (value == "two" || value == "2") cfg.model.kind = ModelKind::TwoLevel;
        else throw ConfigError("model must be 'one' or 'two'");
    } else if (key == "eps_a") {
        cfg.model.eps_a = parse_double(key, value);
    } else if (key == "eps_b") {
        cfg.model.eps_b = parse_double(key, value);
    } else if (key == "alpha_a" || key == "alpha") {
        cfg.model.alpha_a = parse_double(key, value);
    } else if (key == "alpha_b") {
        cfg.model.alpha_b = parse_double(key, value);
    } else if (key == "free_param") {
        try {
            cfg.free_param = parse_free_param(value);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "scan_start") {
        cfg.scan_start = parse_double(key, value);
    } else if (key == "scan_stop") {
        cfg.scan_stop = parse_double(key, value);
    } else if (key == "scan_steps") {
        cfg.scan_steps = parse_int(key, value);
    } else if (key == "ep_lo") {
        cfg.ep_lo = parse_double(key, value);
    } else if (key == "ep_hi") {
        cfg.ep_hi = parse_double(key, value);
    } else if (key == "ep_steps") {
        cfg.ep_steps = parse_int(key, value);
    } else if (key == "c") {
        cfg.c = parse_complex(value);
    } else if (key == "eps_list") {
        cfg.eps_list = parse_list(key, value);
    } else if (key == "puiseux_eps") {
        cfg.puiseux_eps = parse_list(key, value);
    } else if (key == "quotient_eps") {
        cfg.quotient_eps = parse_list(key, value);
    } else if (key.starts_with("tol.") && key.size() > 4) {
        cfg.tolerances[key.substr(4)] = parse_double(key, value);
    } else {
        throw ConfigError("unknown setting '" + key + "'");
    }
}

RunConfig parse_config(std::string_view text, RunConfig base)
{
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        try {
            apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

void validate(const RunConfig& cfg)
{
    if (cfg.scan_steps < 2) throw ConfigError("scan_steps must be at least 2");
    if (cfg.ep_steps < 2) throw ConfigError("ep_steps must be at least 2");
    if (!(cfg.ep_lo < cfg.ep_hi)) throw ConfigError("ep_lo must be below ep_hi");
    if (cfg.c == Complex(0.0)) throw ConfigError("c must be nonzero");
    for (const auto& [name, tol] : cfg.tolerances)
        if (!(tol > 0.0)) throw ConfigError("tolerance '" + name + "' must be positive");
    for (const auto* list : {&cfg.eps_list, &cfg.puiseux_eps, &cfg.quotient_eps})
        for (double e : *list)
            if (e == 0.0) throw ConfigError("eps lists must not contain 0");
    try {
        epj::validate(cfg.model, cfg.free_param);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

unsigned scan_threads()
{
    if (const char* env = std::getenv("EP_JORDAN_THREADS")) {
        const std::string_view s(env);
        unsigned n = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size() && n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ScanRow> run_scan(const RunConfig& cfg, unsigned threads)
{
    const int n = cfg.scan_steps;
    std::vector<std::vector<ScanRow>> per_point(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            const double t = static_cast<double>(i) / (n - 1);
            const double value = i == n - 1 ? cfg.scan_stop : cfg.scan_start + t * (cfg.scan_stop - cfg.scan_start);
            try {
                per_point[static_cast<std::size_t>(i)] = scan_point(cfg.model, cfg.free_param, value);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned count = std::max(1u, std::min(threads, static_cast<unsigned>(n)));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < count; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<ScanRow> rows;
    for (auto& chunk : per_point) rows.insert(rows.end(), chunk.begin(), chunk.end());
    return rows;
}

std::vector<CheckResult> run_verify(const RunConfig& cfg)
{
    Checks checks{cfg, {}};
    const char* ep_names[] = {"ep.f_residual", "ep.df_residual", "ep.selforth_residual", "jordan.chain",
                              "jordan.gram", "jordan.block", "jordan.c_invariance", "norm.self_orthogonal",
                              "norm.orthogonal", "puiseux.slope", "puiseux.z0", "extended.feshbach",
                              "extended.rate", "extended.n2_consistency", "quotient.vs_jordan", "roundtrip.json"};

    std::optional<EpCertificate> found;
    std::string why;
    try {
        found = first_ep(cfg);
    } catch (const Error& e) {
        why = e.what();
    }
    if (!found) {
        for (const char* name : ep_names) checks.skip(name, "no EP: " + why);
        return checks.results;
    }
    const EpCertificate ep = *found;
    const double kappa = get_param(ep.kappa_star, ep.free_param);

    checks.add("ep.f_residual", ep.f_residual, 1e-10);
    checks.add("ep.df_residual", ep.df_residual, 1e-8);
    checks.add("ep.selforth_residual", ep.selforth_residual, 1e-8);
    if (ep.kappa_star.kind == ModelKind::OneLevel && ep.free_param == FreeParam::EpsA) {
        const auto closed = ep_closed_form_model1(ep.kappa_star.alpha_a);
        checks.add("ep.closed_form",
                   std::max(std::abs(kappa - closed.kappa_star.eps_a), std::abs(ep.z0 - closed.z0)), 1e-9);
        const Complex s1 = ep.kappa_star.alpha_a * ep.kappa_star.alpha_a * sigma_scalar(ep.z0, Sheet::Second, 1);
        checks.add("ep.sigma_prime", std::abs(s1 - 1.0), 1e-10);
    }

    double chain = 0.0, gram = 0.0, block = 0.0, c_spread = 0.0;
    std::optional<MatrixXc> reference;
    JordanBasis jb_cfg;
    for (const Complex c : {cfg.c, Complex(1.0, 0.0), Complex(0.0, 1.0), Complex(2.0, -3.0)}) {
        const auto jb = build_jordan(ep, c);
        if (c == cfg.c) jb_cfg = jb;
        Matrix2c want;
        want << ep.z0, c, 0.0, ep.z0;
        chain = std::max({chain, jb.chain_residual_right, jb.chain_residual_left});
        gram = std::max(gram, (jb.gram - Matrix2c::Identity()).norm());
        block = std::max(block, (jb.block - want).norm());
        const MatrixXc p0hp0 = p0_h_p0(jb);
        if (!reference) reference = p0hp0;
        c_spread = std::max(c_spread, (p0hp0 - *reference).cwiseAbs().maxCoeff());
    }
    checks.add("jordan.chain", chain, 1e-9);
    checks.add("jordan.gram", gram, 1e-8);
    checks.add("jordan.block", block, 1e-8);
    checks.add("jordan.c_invariance", c_spread, 1e-9);

    {
        const auto at_ep = make_eigenpair(ep.kappa_star, ep.z0, ep.sheet);
        checks.add("norm.self_orthogonal",
                   std::abs(at_ep.full_norm) / (at_ep.left_p.norm() * at_ep.right_p.norm()), 1e-9);
        const auto spectrum = discrete_spectrum(with_param(ep.kappa_star, ep.free_param, kappa + 1e-2));
        double worst = 0.0;
        for (std::size_t j = 0; j < spectrum.size(); ++j)
            for (std::size_t l = 0; l < spectrum.size(); ++l)
                if (j != l)
                    worst = std::max(worst, std::abs(overlap_full(with_param(ep.kappa_star, ep.free_param, kappa + 1e-2),
                                                                  spectrum[j], spectrum[l])) /
                                                (spectrum[j].left_p.norm() * spectrum[l].right_p.norm()));
        checks.add("norm.orthogonal", worst, 1e-9);
    }

    try {
        const auto fit = fit_puiseux(scan_bifurcation(ep, cfg.puiseux_eps));
        checks.add("puiseux.slope", std::abs(fit.slope - 0.5), 1e-3);
        checks.add("puiseux.z0", std::abs(fit.z0 - ep.z0), 1e-8);
    } catch (const PoorFitError& e) {
        checks.add("puiseux.slope", std::abs(e.fit().slope - 0.5), 1e-3);
        checks.add("puiseux.z0", std::abs(e.fit().z0 - ep.z0), 1e-8);
    }

    const auto report = limit_to_ep(ep, cfg.eps_list, cfg.c);
    double gap = 0.0;
    for (const auto& s : report.samples) gap = std::max(gap, s.feshbach_gap);
    checks.add("extended.feshbach", gap, 1e-7);
    checks.add("extended.rate", std::max(0.0, 0.5 - report.rate), 0.05);
    if (ep.kappa_star.dim() == 1) {
        const auto smallest = std::min_element(report.samples.begin(), report.samples.end(),
                                               [](const auto& a, const auto& b) { return std::abs(a.eps) < std::abs(b.eps); });
        checks.add("extended.deviation", smallest->ket_deviation, 1e-5);
    }
    checks.add("extended.n2_consistency",
               std::abs(report.n2_linear - report.n2_quadratic) / std::abs(report.n2_quadratic), 0.1);

    const auto dq = difference_quotient_pseudovector(ep, cfg.quotient_eps, cfg.c);
    checks.add("quotient.vs_jordan", (dq.psphi0_p - jb_cfg.psphi0_p).norm(), 1e-6);

    {
        const auto ep_back = ep_from_json(Json::parse(to_json(ep).dump()));
        const auto jb_back = jordan_from_json(Json::parse(to_json(jb_cfg).dump()));
        const double diff = std::max({std::abs(ep_back.z0 - ep.z0), std::abs(get_param(ep_back.kappa_star, ep.free_param) - kappa),
                                      (jb_back.psphi0_p - jb_cfg.psphi0_p).norm(), (jb_back.gram - jb_cfg.gram).norm()});
        checks.add("roundtrip.json", diff, 1e-15);
    }
    return checks.results;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exceptional points and Jordan bases of discrete levels coupled to a continuum", "ep-jordan"};
    std::string command;
    std::string config_path;
    std::vector<std::string> params;
    std::string out_path = "-";
    std::string format_name;
    app.add_option("command", command, "scan | find-ep | jordan | extended | puiseux | verify")
        ->required()
        ->check(CLI::IsMember({"scan", "find-ep", "jordan", "extended", "puiseux", "verify"}));
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--param", params, "K=V override (repeatable, wins over the file)");
    app.add_option("--out", out_path, "output file, '-' for stdout");
    app.add_option("--format", format_name, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, "ConfigError", e.what());
        return kConfigError;
    }

    RunConfig cfg;
    Format fmt = Format::Json;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
            std::stringstream buf;
            buf << in.rdbuf();
            cfg = parse_config(buf.str());
        }
        for (const auto& kv : params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--param expects K=V, got '" + kv + "'");
            apply_setting(cfg, std::string_view(kv).substr(0, eq), std::string_view(kv).substr(eq + 1));
        }
        validate(cfg);
        if (format_name.empty())
            fmt = (command == "scan" || command == "extended" || command == "puiseux") ? Format::Csv : Format::Json;
        else
            fmt = format_name == "csv" ? Format::Csv : Format::Json;
    } catch (const ConfigError& e) {
        report_error(err, "ConfigError", e.what());
        return kConfigError;
    }

    std::ostringstream body;
    int code = kOk;
    try {
        emit(command, cfg, fmt, body, code);
    } catch (const ConfigError& e) {
        report_error(err, "ConfigError", e.what());
        return kConfigError;
    } catch (const Error& e) {
        report_error(err, to_string(e.code()), e.what());
        return e.code() == ErrorCode::InvalidArgument ? kConfigError : kSolverFailure;
    } catch (const std::exception& e) {
        report_error(err, "InternalError", e.what());
        return kSolverFailure;
    }

    if (out_path == "-") {
        out << body.str();
    } else {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) {
            report_error(err, "ConfigError", "cannot write output file '" + out_path + "'");
            return kConfigError;
        }
        file << body.str();
    }
    return code;
}

} // namespace epj::cli
