#include "lda/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lda/errors.hpp"

namespace lda::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ContractViolation("csv: bad number '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    return static_cast<int>(std::strtol(s.c_str(), nullptr, 10));
}

} // namespace

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string bank_to_csv(const PrototypeBank& bank) {
    std::ostringstream out;
    out << "class,index";
    for (int c = 0; c < bank.dim(); ++c) out << ",c" << c;
    out << "\n";
    for (int cls = 0; cls < 2; ++cls) {
        for (std::size_t r = 0; r < bank.protos[cls].size(); ++r) {
            out << cls << "," << r;
            for (double x : bank.protos[cls][r]) out << "," << fmt_double(x);
            out << "\n";
        }
    }
    return out.str();
}

PrototypeBank bank_from_csv(const std::string& csv) {
    auto rows = lines_of(csv);
    if (rows.empty()) throw ContractViolation("bank csv: empty file");
    PrototypeBank bank;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto cells = split(rows[i], ',');
        if (cells.size() < 3) throw ContractViolation("bank csv: short row");
        int cls = parse_int(cells[0]);
        if (cls != 0 && cls != 1) throw ContractViolation("bank csv: bad class");
        Vec p;
        for (std::size_t c = 2; c < cells.size(); ++c) p.push_back(parse_double(cells[c]));
        bank.protos[cls].push_back(std::move(p));
    }
    return bank;
}

std::string samples_to_csv(const std::vector<LabeledSample>& samples) {
    std::ostringstream out;
    int d = samples.empty() ? 0 : static_cast<int>(samples[0].x.size());
    for (int i = 0; i < d; ++i) out << "x" << i << ",";
    out << "y,spoof_type,illum,cluster\n";
    for (const LabeledSample& s : samples) {
        for (double x : s.x) out << fmt_double(x) << ",";
        out << s.y << "," << s.spoof_type << "," << s.illum << "," << s.cluster << "\n";
    }
    return out.str();
}

std::vector<LabeledSample> samples_from_csv(const std::string& csv) {
    auto rows = lines_of(csv);
    if (rows.empty()) throw ContractViolation("samples csv: empty file");
    auto header = split(rows[0], ',');
    int d = 0;
    while (d < static_cast<int>(header.size()) && header[d][0] == 'x') ++d;
    if (d == 0 || header.size() != static_cast<std::size_t>(d) + 4)
        throw ContractViolation("samples csv: unexpected header");

    std::vector<LabeledSample> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto cells = split(rows[i], ',');
        if (cells.size() != header.size())
            throw ContractViolation("samples csv: row width mismatch");
        LabeledSample s;
        for (int c = 0; c < d; ++c) s.x.push_back(parse_double(cells[c]));
        s.y = parse_int(cells[d]);
        s.spoof_type = parse_int(cells[d + 1]);
        s.illum = parse_int(cells[d + 2]);
        s.cluster = parse_int(cells[d + 3]);
        out.push_back(std::move(s));
    }
    return out;
}

std::string history_to_csv(const TrainHistory& history) {
    std::ostringstream out;
    out << "epoch,total,pd,pc_inter,pc_intra,aux,train_acer,max_proto_norm_err\n";
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        const EpochStats& s = history.epochs[e];
        out << e << "," << fmt_double(s.total) << "," << fmt_double(s.pd) << ","
            << fmt_double(s.pc_inter) << "," << fmt_double(s.pc_intra) << ","
            << fmt_double(s.aux) << "," << fmt_double(s.train_acer) << ","
            << fmt_double(s.max_proto_norm_err) << "\n";
    }
    return out.str();
}

std::string metrics_to_csv(const EvalReport& report, const std::string& split) {
    std::ostringstream out;
    out << "metric,split,threshold,value\n";
    std::string thr = fmt_double(report.threshold);
    out << "apcer," << split << "," << thr << "," << fmt_double(report.apcer) << "\n";
    out << "bpcer," << split << "," << thr << "," << fmt_double(report.bpcer) << "\n";
    out << "acer," << split << "," << thr << "," << fmt_double(report.acer) << "\n";
    out << "hter," << split << "," << thr << "," << fmt_double(report.hter) << "\n";
    for (const auto& [target, tpr] : report.tpr_at_fpr) {
        char name[48];
        std::snprintf(name, sizeof(name), "tpr@fpr=%g", target);
        out << name << "," << split << "," << thr << "," << fmt_double(tpr) << "\n";
    }
    return out.str();
}

nlohmann::json model_to_json(const MlpParams& params) {
    nlohmann::json j;
    j["layer_sizes"] = params.layer_sizes;
    nlohmann::json weights = nlohmann::json::array();
    for (const Matrix& w : params.weights) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < w.rows; ++r) rows.push_back(w.row(r));
        weights.push_back(rows);
    }
    j["weights"] = weights;
    j["biases"] = params.biases;
    return j;
}

MlpParams model_from_json(const nlohmann::json& j) {
    MlpParams p;
    p.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    if (p.layer_sizes.size() < 2) throw ConfigError("model json: bad layer_sizes");
    for (const auto& wj : j.at("weights")) {
        auto rows = wj.get<std::vector<Vec>>();
        Matrix w(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            w.set_row(static_cast<int>(r), rows[r]);
        p.weights.push_back(std::move(w));
    }
    p.biases = j.at("biases").get<std::vector<Vec>>();
    if (p.weights.size() + 1 != p.layer_sizes.size() ||
        p.biases.size() != p.weights.size())
        throw ConfigError("model json: inconsistent shapes");
    return p;
}

nlohmann::json config_to_json(const TrainConfig& cfg) {
    nlohmann::json j;
    j["layer_sizes"] = cfg.layer_sizes;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["lr"] = cfg.lr;
    j["momentum"] = cfg.momentum;
    j["seed"] = cfg.seed;
    j["use_pc_inter"] = cfg.use_pc_inter;
    j["use_pc_intra"] = cfg.use_pc_intra;
    j["use_aux"] = cfg.use_aux;
    j["n_spoof_types"] = cfg.n_spoof_types;
    j["n_illum"] = cfg.n_illum;
    j["lda"] = {{"s", cfg.lda.s},
                {"m", cfg.lda.m},
                {"tau_w", cfg.lda.tau_w},
                {"delta1", cfg.lda.delta1},
                {"delta2", cfg.lda.delta2},
                {"lambda1", cfg.lda.lambda1},
                {"lambda2", cfg.lda.lambda2},
                {"lambda_s", cfg.lda.lambda_s},
                {"lambda_i", cfg.lda.lambda_i},
                {"lambda_aux", cfg.lda.lambda_aux},
                {"k_init", cfg.lda.k_init}};
    return j;
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& known,
                    const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("config json: unknown field '" + key + "' in " + where);
    }
}

} // namespace

TrainConfig config_from_json(const nlohmann::json& j) {
    reject_unknown(j,
                   {"layer_sizes", "epochs", "batch_size", "lr", "momentum", "seed",
                    "use_pc_inter", "use_pc_intra", "use_aux", "n_spoof_types", "n_illum",
                    "lda"},
                   "top level");
    TrainConfig cfg;
    read_field(j, "layer_sizes", cfg.layer_sizes);
    read_field(j, "epochs", cfg.epochs);
    read_field(j, "batch_size", cfg.batch_size);
    read_field(j, "lr", cfg.lr);
    read_field(j, "momentum", cfg.momentum);
    read_field(j, "seed", cfg.seed);
    read_field(j, "use_pc_inter", cfg.use_pc_inter);
    read_field(j, "use_pc_intra", cfg.use_pc_intra);
    read_field(j, "use_aux", cfg.use_aux);
    read_field(j, "n_spoof_types", cfg.n_spoof_types);
    read_field(j, "n_illum", cfg.n_illum);
    if (j.contains("lda")) {
        const auto& l = j.at("lda");
        reject_unknown(l,
                       {"s", "m", "tau_w", "delta1", "delta2", "lambda1", "lambda2",
                        "lambda_s", "lambda_i", "lambda_aux", "k_init"},
                       "lda");
        read_field(l, "s", cfg.lda.s);
        read_field(l, "m", cfg.lda.m);
        read_field(l, "tau_w", cfg.lda.tau_w);
        read_field(l, "delta1", cfg.lda.delta1);
        read_field(l, "delta2", cfg.lda.delta2);
        read_field(l, "lambda1", cfg.lda.lambda1);
        read_field(l, "lambda2", cfg.lda.lambda2);
        read_field(l, "lambda_s", cfg.lda.lambda_s);
        read_field(l, "lambda_i", cfg.lda.lambda_i);
        read_field(l, "lambda_aux", cfg.lda.lambda_aux);
        read_field(l, "k_init", cfg.lda.k_init);
    }
    validate(cfg);
    return cfg;
}

nlohmann::json spec_to_json(const MixtureSpec& spec) {
    nlohmann::json j;
    j["d_in"] = spec.d_in;
    j["live_fraction"] = spec.live_fraction;
    const char* names[2] = {"live", "spoof"};
    for (int cls = 0; cls < 2; ++cls) {
        nlohmann::json arr = nlohmann::json::array();
        for (const GaussianCluster& c : spec.clusters[cls]) {
            arr.push_back({{"mean", c.mean},
                           {"stddev", c.stddev},
                           {"weight", c.weight},
                           {"spoof_type", c.spoof_type},
                           {"illum", c.illum}});
        }
        j[names[cls]] = arr;
    }
    return j;
}

MixtureSpec spec_from_json(const nlohmann::json& j) {
    MixtureSpec spec;
    spec.d_in = j.at("d_in").get<int>();
    read_field(j, "live_fraction", spec.live_fraction);
    const char* names[2] = {"live", "spoof"};
    for (int cls = 0; cls < 2; ++cls) {
        for (const auto& cj : j.at(names[cls])) {
            GaussianCluster c;
            c.mean = cj.at("mean").get<Vec>();
            c.stddev = cj.at("stddev").get<double>();
            c.weight = cj.at("weight").get<double>();
            read_field(cj, "spoof_type", c.spoof_type);
            read_field(cj, "illum", c.illum);
            spec.clusters[cls].push_back(std::move(c));
        }
    }
    validate(spec);
    return spec;
}

nlohmann::json eval_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["threshold"] = report.threshold;
    j["apcer"] = report.apcer;
    j["bpcer"] = report.bpcer;
    j["acer"] = report.acer;
    j["hter"] = report.hter;
    nlohmann::json tprs = nlohmann::json::array();
    for (const auto& [target, tpr] : report.tpr_at_fpr)
        tprs.push_back({{"fpr", target}, {"tpr", tpr}});
    j["tpr_at_fpr"] = tprs;
    return j;
}

nlohmann::json manifest_json(const TrainConfig& cfg, const EvalReport& final_dev) {
    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["seed"] = cfg.seed;
    j["metrics"] = eval_to_json(final_dev);
    return j;
}

nlohmann::json aps_log_json(const SelectionResult& result) {
    nlohmann::json j;
    j["t_live"] = result.thresholds[kLive];
    j["t_spoof"] = result.thresholds[kSpoof];
    nlohmann::json steps = nlohmann::json::array();
    for (const SelectionStep& s : result.log) {
        steps.push_back({{"class", s.cls},
                         {"step", s.step},
                         {"prototype", s.prototype},
                         {"density", s.density},
                         {"popped", s.popped}});
    }
    j["steps"] = steps;
    j["selected_live"] = result.selected[kLive];
    j["selected_spoof"] = result.selected[kSpoof];
    return j;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace lda::io
