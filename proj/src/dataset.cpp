#include "symgrad/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "symgrad/io.hpp"
#include "symgrad/rng.hpp"

namespace symgrad {

using nlohmann::json;

void save_triplets(const std::string& path, const TripletDataset& ds) {
    std::string out;
    out.reserve(ds.triplets.size() * 3 * 24 * std::size_t(ds.header.d) / 2 + 256);
    out += "{\"experiment\":\"";
    out += ds.header.experiment;
    out += "\",\"d\":";
    out += std::to_string(ds.header.d);
    out += ",\"seed\":";
    out += std::to_string(ds.header.seed);
    out += ",\"range\":";
    append_double(out, ds.header.range);
    out += ",\"mode\":\"";
    out += ds.header.mode;
    out += "\",\"count\":";
    out += std::to_string(ds.header.count);
    out += "}\n";
    for (const Triplet& t : ds.triplets) {
        out += "{\"a\":";
        append_array(out, t.anchor);
        out += ",\"p\":";
        append_array(out, t.positive);
        out += ",\"n\":";
        append_array(out, t.negative);
        out += "}\n";
    }
    write_text_file(path, out);
}

static std::vector<double> to_vec(const json& j) {
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(e.get<double>());
    return v;
}

TripletDataset load_triplets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open triplet file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty triplet file: " + path);
    json h = json::parse(line);
    TripletDataset ds;
    ds.header.experiment = h.value("experiment", "");
    ds.header.d = h.value("d", 0);
    ds.header.seed = h.value("seed", std::uint64_t(0));
    ds.header.range = h.value("range", 0.0);
    ds.header.mode = h.value("mode", "");
    ds.header.count = h.value("count", std::uint64_t(0));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        Triplet t;
        t.anchor = to_vec(j.at("a"));
        t.positive = to_vec(j.at("p"));
        t.negative = to_vec(j.at("n"));
        if (ds.header.d && (int(t.anchor.size()) != ds.header.d ||
                            int(t.positive.size()) != ds.header.d ||
                            int(t.negative.size()) != ds.header.d))
            throw std::runtime_error("triplet dimension mismatch in " + path);
        ds.triplets.push_back(std::move(t));
    }
    return ds;
}

Split split_for_index(std::uint64_t index) {
    return splitmix64(index ^ 0x5e4c72a3d1b90f68ULL) % 5 == 4 ? Split::validation
                                                              : Split::search;
}

std::size_t GradientDataset::count(Split s) const {
    std::size_t n = 0;
    for (const auto& smp : samples) n += (smp.split == s);
    return n;
}

GradientView make_view(const GradientDataset& ds, Split split) {
    GradientView v;
    v.d = ds.header.d;
    for (const auto& s : ds.samples) {
        if (s.split != split) continue;
        v.x.insert(v.x.end(), s.x.begin(), s.x.end());
        v.g.insert(v.g.end(), s.g.begin(), s.g.end());
        ++v.count;
    }
    return v;
}

void save_gradients(const std::string& path, const GradientDataset& ds) {
    std::string out;
    out.reserve(ds.samples.size() * 2 * 24 * std::size_t(ds.header.d) + 256);
    out += "{\"experiment\":\"";
    out += ds.header.experiment;
    out += "\",\"d\":";
    out += std::to_string(ds.header.d);
    out += ",\"epsilon\":";
    append_double(out, ds.header.epsilon);
    out += ",\"model_hash\":\"";
    out += ds.header.model_hash;
    out += "\",\"input_hash\":\"";
    out += ds.header.input_hash;
    out += "\",\"dropped\":";
    out += std::to_string(ds.header.dropped);
    out += ",\"drop_warning\":";
    out += ds.header.drop_warning ? "true" : "false";
    out += "}\n";
    for (const GradientSample& s : ds.samples) {
        out += "{\"x\":";
        append_array(out, s.x);
        out += ",\"g\":";
        append_array(out, s.g);
        out += ",\"split\":\"";
        out += s.split == Split::search ? "search" : "val";
        out += "\"}\n";
    }
    write_text_file(path, out);
}

GradientDataset load_gradients(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gradient file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty gradient file: " + path);
    json h = json::parse(line);
    GradientDataset ds;
    ds.header.experiment = h.value("experiment", "");
    ds.header.d = h.value("d", 0);
    ds.header.epsilon = h.value("epsilon", 0.0);
    ds.header.model_hash = h.value("model_hash", "");
    ds.header.input_hash = h.value("input_hash", "");
    ds.header.dropped = h.value("dropped", std::uint64_t(0));
    ds.header.drop_warning = h.value("drop_warning", false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        GradientSample s;
        s.x = to_vec(j.at("x"));
        s.g = to_vec(j.at("g"));
        const std::string sp = j.at("split").get<std::string>();
        if (sp == "search")
            s.split = Split::search;
        else if (sp == "val")
            s.split = Split::validation;
        else
            throw std::runtime_error("bad split tag in " + path + ": " + sp);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace symgrad
