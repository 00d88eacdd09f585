#include "pqbench/dataio.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pqbench::dataio {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Text primitives
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for write: " + tmp);
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Dataset persistence
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kRecordBytes =
    static_cast<std::size_t>(synth::kNumChannels) *
    synth::kSamplesPerChannel * sizeof(double);

json params_to_json(const synth::SynthParams& p) {
    json j;
    j["event_time"] = p.event_time;
    j["phase_fault_resistance"] = p.phase_fault_resistance;
    j["ground_resistance"] = p.ground_resistance;
    j["fault_location_fraction"] = p.fault_location_fraction;
    j["breaker_delay"] = p.breaker_delay;
    j["load_resistance"] = p.load_resistance;
    j["load_inductance"] = p.load_inductance;
    j["load_capacitance"] = p.load_capacitance;
    j["load_perturbation"] = p.load_perturbation;
    j["record_index"] = p.record_index;
    j["master_seed"] = p.master_seed;
    return j;
}

synth::SynthParams params_from_json(const json& j) {
    synth::SynthParams p;
    p.event_time = j.at("event_time").get<double>();
    p.phase_fault_resistance = j.at("phase_fault_resistance").get<double>();
    p.ground_resistance = j.at("ground_resistance").get<double>();
    p.fault_location_fraction = j.at("fault_location_fraction").get<double>();
    p.breaker_delay = j.at("breaker_delay").get<double>();
    p.load_resistance = j.at("load_resistance").get<double>();
    p.load_inductance = j.at("load_inductance").get<double>();
    p.load_capacitance = j.at("load_capacitance").get<double>();
    const auto pert = j.at("load_perturbation");
    if (!pert.is_array() || pert.size() != 3) {
        throw std::runtime_error("manifest: load_perturbation must have 3 entries");
    }
    for (int i = 0; i < 3; ++i) p.load_perturbation[i] = pert[i].get<double>();
    p.record_index = j.at("record_index").get<int>();
    p.master_seed = j.at("master_seed").get<std::uint64_t>();
    return p;
}

}  // namespace

std::string write_dataset(const std::vector<synth::WaveformRecord>& records,
                          const std::string& directory,
                          const std::string& split_tag) {
    if (records.empty()) {
        throw std::invalid_argument("write_dataset: empty record list");
    }
    fs::create_directories(directory);

    json manifest;
    manifest["format_version"] = kDatasetFormatVersion;
    manifest["sample_rate"] = 4000;
    manifest["samples_per_channel"] = synth::kSamplesPerChannel;
    manifest["split"] = split_tag;
    manifest["channel_order"] = synth::channel_names();
    manifest["class_names"] = synth::class_names();
    json entries = json::array();
    std::string blob;
    blob.reserve(records.size() * kRecordBytes);
    for (const auto& rec : records) {
        json e;
        e["id"] = rec.id;
        e["class_code"] = synth::class_code(rec.label);
        e["params"] = params_to_json(rec.params);
        e["offset"] = blob.size();
        entries.push_back(std::move(e));
        for (const auto& ch : rec.samples) {
            if (ch.size() != synth::kSamplesPerChannel) {
                throw std::invalid_argument("write_dataset: bad channel length");
            }
            const std::size_t pos = blob.size();
            blob.resize(pos + ch.size() * sizeof(double));
            std::memcpy(blob.data() + pos, ch.data(),
                        ch.size() * sizeof(double));
        }
    }
    manifest["records"] = std::move(entries);

    const std::string blob_path =
        (fs::path(directory) / "waveforms.f64le").string();
    const std::string manifest_path =
        (fs::path(directory) / "manifest.json").string();
    write_text_atomic(blob_path, blob);
    write_text_atomic(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

std::vector<synth::WaveformRecord> read_dataset(const std::string& directory) {
    const std::string manifest_path =
        (fs::path(directory) / "manifest.json").string();
    const std::string blob_path =
        (fs::path(directory) / "waveforms.f64le").string();
    json manifest;
    try {
        manifest = json::parse(read_text(manifest_path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("corrupt manifest: ") + e.what());
    }
    if (manifest.at("format_version").get<int>() != kDatasetFormatVersion) {
        throw std::runtime_error("dataset format version mismatch");
    }
    if (manifest.at("samples_per_channel").get<int>() !=
        synth::kSamplesPerChannel) {
        throw std::runtime_error("dataset: unexpected samples_per_channel");
    }
    const std::string blob = read_text(blob_path);
    const auto& entries = manifest.at("records");
    if (blob.size() != entries.size() * kRecordBytes) {
        // locate the first record whose data is missing
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const std::size_t offset = entries[i].at("offset").get<std::size_t>();
            if (offset + kRecordBytes > blob.size()) {
                throw std::runtime_error(
                    "waveform blob truncated at record index " +
                    std::to_string(i));
            }
        }
        throw std::runtime_error("waveform blob size mismatch");
    }

    std::vector<synth::WaveformRecord> records;
    records.reserve(entries.size());
    std::size_t expected_offset = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const std::size_t offset = e.at("offset").get<std::size_t>();
        if (offset != expected_offset) {
            throw std::runtime_error("manifest offsets inconsistent at record " +
                                     std::to_string(i));
        }
        expected_offset += kRecordBytes;
        synth::WaveformRecord rec;
        rec.id = e.at("id").get<std::int64_t>();
        rec.label = synth::class_from_code(e.at("class_code").get<int>());
        rec.params = params_from_json(e.at("params"));
        std::size_t pos = offset;
        for (auto& ch : rec.samples) {
            ch.resize(synth::kSamplesPerChannel);
            std::memcpy(ch.data(), blob.data() + pos,
                        synth::kSamplesPerChannel * sizeof(double));
            pos += synth::kSamplesPerChannel * sizeof(double);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Features CSV
// ---------------------------------------------------------------------------

void write_features(const std::vector<features::FeatureVector>& rows,
                    const std::string& path) {
    std::ostringstream out;
    out << "record_id,label";
    for (int j = 0; j < features::kFeatureDim; ++j) {
        out << ',' << features::feature_column_name(j);
    }
    out << '\n';
    for (const auto& row : rows) {
        out << row.record_id << ',' << synth::class_code(row.label);
        for (double v : row.values) out << ',' << format_double(v);
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

std::vector<features::FeatureVector> read_features(const std::string& path) {
    const std::string text = read_text(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("features CSV is empty: " + path);
    }
    {
        std::ostringstream expect;
        expect << "record_id,label";
        for (int j = 0; j < features::kFeatureDim; ++j) {
            expect << ',' << features::feature_column_name(j);
        }
        if (line != expect.str()) {
            throw std::runtime_error("features CSV header malformed: " + path);
        }
    }
    std::vector<features::FeatureVector> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (static_cast<int>(fields.size()) != features::kFeatureDim + 2) {
            throw std::runtime_error("features CSV data row " +
                                     std::to_string(lineno - 1) +
                                     " has wrong field count");
        }
        features::FeatureVector row;
        try {
            row.record_id = std::stoll(fields[0]);
            row.label = synth::class_from_code(std::stoi(fields[1]));
            for (int j = 0; j < features::kFeatureDim; ++j) {
                std::size_t used = 0;
                row.values[j] = std::stod(fields[2 + j], &used);
                if (used != fields[2 + j].size()) {
                    throw std::invalid_argument("trailing characters");
                }
            }
        } catch (const std::exception&) {
            throw std::runtime_error("features CSV row " +
                                     std::to_string(lineno) + " malformed");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Model JSON
// ---------------------------------------------------------------------------

namespace {

json hyper_to_json(const models::Hyper& h) {
    json j;
    j["svm_c"] = h.svm_c;
    j["svm_gamma"] = h.svm_gamma;
    j["svm_tol"] = h.svm_tol;
    j["svm_max_sweeps"] = h.svm_max_sweeps;
    j["gbt_rounds"] = h.gbt_rounds;
    j["gbt_eta"] = h.gbt_eta;
    j["gbt_lambda"] = h.gbt_lambda;
    j["gbt_gamma"] = h.gbt_gamma;
    j["gbt_max_depth"] = h.gbt_max_depth;
    j["logreg_lambda"] = h.logreg_lambda;
    j["logreg_max_iters"] = h.logreg_max_iters;
    j["knn_k"] = h.knn_k;
    j["cart_max_depth"] = h.cart_max_depth;
    j["forest_trees"] = h.forest_trees;
    j["forest_features"] = h.forest_features;
    j["forest_bootstrap"] = h.forest_bootstrap;
    return j;
}

models::Hyper hyper_from_json(const json& j) {
    models::Hyper h;
    h.svm_c = j.at("svm_c").get<double>();
    h.svm_gamma = j.at("svm_gamma").get<double>();
    h.svm_tol = j.at("svm_tol").get<double>();
    h.svm_max_sweeps = j.at("svm_max_sweeps").get<int>();
    h.gbt_rounds = j.at("gbt_rounds").get<int>();
    h.gbt_eta = j.at("gbt_eta").get<double>();
    h.gbt_lambda = j.at("gbt_lambda").get<double>();
    h.gbt_gamma = j.at("gbt_gamma").get<double>();
    h.gbt_max_depth = j.at("gbt_max_depth").get<int>();
    h.logreg_lambda = j.at("logreg_lambda").get<double>();
    h.logreg_max_iters = j.at("logreg_max_iters").get<int>();
    h.knn_k = j.at("knn_k").get<int>();
    h.cart_max_depth = j.at("cart_max_depth").get<int>();
    h.forest_trees = j.at("forest_trees").get<int>();
    h.forest_features = j.at("forest_features").get<int>();
    h.forest_bootstrap = j.at("forest_bootstrap").get<bool>();
    return h;
}

json tree_to_json(const models::Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        json jn;
        jn["leaf"] = n.leaf;
        jn["feature"] = n.feature;
        jn["threshold"] = n.threshold;
        jn["left"] = n.left;
        jn["right"] = n.right;
        jn["value"] = n.value;
        nodes.push_back(std::move(jn));
    }
    return json{{"nodes", std::move(nodes)}};
}

models::Tree tree_from_json(const json& j) {
    models::Tree t;
    for (const auto& jn : j.at("nodes")) {
        models::TreeNode n;
        n.leaf = jn.at("leaf").get<bool>();
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.value = jn.at("value").get<double>();
        t.nodes.push_back(n);
    }
    if (t.nodes.empty()) throw std::runtime_error("model: empty tree");
    return t;
}

json state_to_json(const models::ModelState& state) {
    using namespace models;
    return std::visit(
        [](const auto& st) -> json {
            using T = std::decay_t<decltype(st)>;
            json j;
            if constexpr (std::is_same_v<T, SvmState>) {
                j["type"] = "svm";
                j["kernel"] = static_cast<int>(st.kernel);
                j["gamma"] = st.gamma;
                j["classes"] = st.classes;
                json machines = json::array();
                for (const auto& m : st.machines) {
                    json jm;
                    jm["class_a"] = m.class_a;
                    jm["class_b"] = m.class_b;
                    jm["bias"] = m.bias;
                    jm["alpha_y"] = m.alpha_y;
                    jm["vectors"] = m.vectors;
                    machines.push_back(std::move(jm));
                }
                j["machines"] = std::move(machines);
            } else if constexpr (std::is_same_v<T, GbtState>) {
                j["type"] = "gbt";
                j["num_classes"] = st.num_classes;
                j["eta"] = st.eta;
                json trees = json::array();
                for (const auto& t : st.trees) trees.push_back(tree_to_json(t));
                j["trees"] = std::move(trees);
            } else if constexpr (std::is_same_v<T, LogRegState>) {
                j["type"] = "logreg";
                j["num_classes"] = st.num_classes;
                j["dim"] = st.dim;
                j["w"] = st.w;
            } else if constexpr (std::is_same_v<T, KnnState>) {
                j["type"] = "knn";
                j["k"] = st.k;
                j["x"] = st.x;
                j["y"] = st.y;
            } else if constexpr (std::is_same_v<T, CartState>) {
                j["type"] = "cart";
                j["tree"] = tree_to_json(st.tree);
            } else if constexpr (std::is_same_v<T, ForestState>) {
                j["type"] = "forest";
                json trees = json::array();
                for (const auto& t : st.trees) trees.push_back(tree_to_json(t));
                j["trees"] = std::move(trees);
            } else {
                j["type"] = "gnb";
                j["classes"] = st.classes;
                j["log_priors"] = st.log_priors;
                j["means"] = st.means;
                j["vars"] = st.vars;
            }
            return j;
        },
        state);
}

models::ModelState state_from_json(const json& j) {
    using namespace models;
    const std::string type = j.at("type").get<std::string>();
    if (type == "svm") {
        SvmState st;
        st.kernel = static_cast<KernelKind>(j.at("kernel").get<int>());
        st.gamma = j.at("gamma").get<double>();
        st.classes = j.at("classes").get<std::vector<int>>();
        for (const auto& jm : j.at("machines")) {
            SvmMachine m;
            m.class_a = jm.at("class_a").get<int>();
            m.class_b = jm.at("class_b").get<int>();
            m.bias = jm.at("bias").get<double>();
            m.alpha_y = jm.at("alpha_y").get<std::vector<double>>();
            m.vectors =
                jm.at("vectors").get<std::vector<std::vector<double>>>();
            if (m.alpha_y.size() != m.vectors.size()) {
                throw std::runtime_error("model: svm machine shape mismatch");
            }
            st.machines.push_back(std::move(m));
        }
        return st;
    }
    if (type == "gbt") {
        GbtState st;
        st.num_classes = j.at("num_classes").get<int>();
        st.eta = j.at("eta").get<double>();
        for (const auto& jt : j.at("trees")) st.trees.push_back(tree_from_json(jt));
        if (st.num_classes < 2 ||
            st.trees.size() % static_cast<std::size_t>(st.num_classes) != 0) {
            throw std::runtime_error("model: gbt tree count mismatch");
        }
        return st;
    }
    if (type == "logreg") {
        LogRegState st;
        st.num_classes = j.at("num_classes").get<int>();
        st.dim = j.at("dim").get<int>();
        st.w = j.at("w").get<std::vector<double>>();
        if (st.w.size() != static_cast<std::size_t>(st.num_classes) *
                               (st.dim + 1)) {
            throw std::runtime_error("model: logreg weight shape mismatch");
        }
        return st;
    }
    if (type == "knn") {
        KnnState st;
        st.k = j.at("k").get<int>();
        st.x = j.at("x").get<std::vector<std::vector<double>>>();
        st.y = j.at("y").get<std::vector<int>>();
        if (st.x.size() != st.y.size()) {
            throw std::runtime_error("model: knn shape mismatch");
        }
        return st;
    }
    if (type == "cart") {
        return CartState{tree_from_json(j.at("tree"))};
    }
    if (type == "forest") {
        ForestState st;
        for (const auto& jt : j.at("trees")) st.trees.push_back(tree_from_json(jt));
        if (st.trees.empty()) throw std::runtime_error("model: empty forest");
        return st;
    }
    if (type == "gnb") {
        GnbState st;
        st.classes = j.at("classes").get<std::vector<int>>();
        st.log_priors = j.at("log_priors").get<std::vector<double>>();
        st.means = j.at("means").get<std::vector<std::vector<double>>>();
        st.vars = j.at("vars").get<std::vector<std::vector<double>>>();
        if (st.classes.size() != st.log_priors.size() ||
            st.classes.size() != st.means.size() ||
            st.classes.size() != st.vars.size()) {
            throw std::runtime_error("model: gnb shape mismatch");
        }
        return st;
    }
    throw std::runtime_error("unknown model kind in file: " + type);
}

}  // namespace

std::string model_to_json(const models::TrainedModel& model) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["spec"]["kind"] = models::kind_name(model.spec.kind);
    j["spec"]["seed"] = model.spec.seed;
    j["spec"]["hyper"] = hyper_to_json(model.spec.hyper);
    j["normalizer"]["mean"] = model.normalizer.mean;
    j["normalizer"]["sd"] = model.normalizer.sd;
    j["params"] = state_to_json(model.state);
    return j.dump(2) + "\n";
}

models::TrainedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("corrupt model file: ") + e.what());
    }
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
        throw std::runtime_error("model format version mismatch");
    }
    models::TrainedModel model;
    model.spec.kind =
        models::kind_from_name(j.at("spec").at("kind").get<std::string>());
    model.spec.seed = j.at("spec").at("seed").get<std::uint64_t>();
    model.spec.hyper = hyper_from_json(j.at("spec").at("hyper"));
    model.normalizer.mean =
        j.at("normalizer").at("mean").get<std::vector<double>>();
    model.normalizer.sd = j.at("normalizer").at("sd").get<std::vector<double>>();
    if (model.normalizer.mean.size() != model.normalizer.sd.size()) {
        throw std::runtime_error("model: normalizer shape mismatch");
    }
    for (double sd : model.normalizer.sd) {
        if (!(sd >= 1e-12)) {
            throw std::runtime_error("model: normalizer sd below floor");
        }
    }
    model.state = state_from_json(j.at("params"));
    return model;
}

void write_model(const models::TrainedModel& model, const std::string& path) {
    write_text_atomic(path, model_to_json(model));
}

models::TrainedModel read_model(const std::string& path) {
    return model_from_json(read_text(path));
}

// ---------------------------------------------------------------------------
// Reports and leaderboard
// ---------------------------------------------------------------------------

void write_report(const eval::EvalReport& report, const std::string& path) {
    json j;
    j["model"] = report.model_name;
    if (report.failed) {
        j["status"] = "error";
        j["error"] = report.error;
    } else {
        j["status"] = "ok";
        j["accuracy"] = report.accuracy;
        json per_class = json::array();
        for (int c = 0; c < static_cast<int>(report.per_class.size()); ++c) {
            json m;
            m["class"] = synth::class_names()[c];
            m["precision"] = report.per_class[c].precision;
            m["recall"] = report.per_class[c].recall;
            m["f1"] = report.per_class[c].f1;
            per_class.push_back(std::move(m));
        }
        j["per_class"] = std::move(per_class);
        json rows = json::array();
        for (int i = 0; i < report.confusion.num_classes; ++i) {
            json row = json::array();
            for (int k = 0; k < report.confusion.num_classes; ++k) {
                row.push_back(report.confusion.at(i, k));
            }
            rows.push_back(std::move(row));
        }
        j["confusion"] = std::move(rows);
        const auto pair = eval::top_confusion_pair(report.confusion);
        j["top_confusion_pair"] = {synth::class_names()[pair.first],
                                   synth::class_names()[pair.second]};
    }
    j["train_seconds"] = report.train_seconds;
    j["predict_seconds"] = report.predict_seconds;
    j["train_digest"] = report.train_digest;
    j["test_digest"] = report.test_digest;
    write_text_atomic(path, j.dump(2) + "\n");
}

std::string leaderboard_csv(const eval::Leaderboard& board) {
    std::ostringstream out;
    out << "model,accuracy,status\n";
    for (const auto& r : board.reports) {
        out << r.model_name << ',' << format_double(r.accuracy) << ','
            << (r.failed ? "error" : "ok") << '\n';
    }
    return out.str();
}

}  // namespace pqbench::dataio
