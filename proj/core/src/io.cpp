#include "reverso/io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace reverso {

namespace {

using nlohmann::json;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

json series_to_json(const Series& s) {
    json values = json::array();
    for (double v : s.values) {
        if (std::isfinite(v))
            values.push_back(v);
        else
            values.push_back(nullptr);
    }
    return json{{"id", s.id},
                {"source", s.source},
                {"length", s.values.size()},
                {"values", std::move(values)}};
}

Series series_from_json(const json& j) {
    Series s;
    s.id = j.value("id", "");
    s.source = j.value("source", "");
    if (j.contains("freq")) s.freq = j.at("freq").get<std::string>();
    for (const json& v : j.at("values"))
        s.values.push_back(v.is_null() ? kNaN : v.get<double>());
    if (j.contains("length") && j.at("length").get<std::size_t>() != s.values.size())
        throw std::runtime_error("corpus record length field does not match values");
    return s;
}

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated binary corpus");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const std::uint32_t len = read_raw<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("truncated binary corpus");
    return s;
}

}  // namespace

void write_corpus_jsonl(const std::string& path, const std::vector<Series>& corpus) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const Series& s : corpus) out << series_to_json(s).dump() << '\n';
}

std::vector<Series> read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<Series> corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        corpus.push_back(series_from_json(json::parse(line)));
    }
    return corpus;
}

void write_corpus_binary(const std::string& path, const std::vector<Series>& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write("RVSC", 4);
    write_raw<std::uint32_t>(out, 1);
    write_raw<std::uint64_t>(out, corpus.size());
    for (const Series& s : corpus) {
        write_string(out, s.id);
        write_string(out, s.source);
        write_raw<std::uint64_t>(out, s.values.size());
        for (double v : s.values) write_raw<float>(out, static_cast<float>(v));
    }
}

std::vector<Series> read_corpus_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "RVSC")
        throw std::runtime_error("not a binary corpus file: " + path);
    const std::uint32_t version = read_raw<std::uint32_t>(in);
    if (version != 1) throw std::runtime_error("unsupported corpus version");
    const std::uint64_t n = read_raw<std::uint64_t>(in);
    std::vector<Series> corpus(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Series& s = corpus[i];
        s.id = read_string(in);
        s.source = read_string(in);
        const std::uint64_t len = read_raw<std::uint64_t>(in);
        s.values.resize(len);
        for (std::uint64_t t = 0; t < len; ++t)
            s.values[t] = static_cast<double>(read_raw<float>(in));
    }
    return corpus;
}

namespace {

double parse_cell(const std::string& cell) {
    if (cell.empty() || cell == "NaN" || cell == "nan" || cell == "null" || cell == "NA")
        return kNaN;
    return std::stod(cell);
}

std::vector<double> load_series_csv(std::istream& in) {
    std::vector<double> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        // Last comma-separated field is the value; anything before it is an
        // optional timestamp column.
        const std::size_t comma = line.find_last_of(',');
        const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
        if (first) {
            first = false;
            try {
                values.push_back(parse_cell(cell));
            } catch (const std::exception&) {
                // header row
            }
            continue;
        }
        values.push_back(parse_cell(cell));
    }
    return values;
}

std::vector<double> load_series_jsonl(std::istream& in) {
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (j.is_number()) {
            values.push_back(j.get<double>());
        } else if (j.is_null()) {
            values.push_back(kNaN);
        } else if (j.is_object() && j.contains("values")) {
            for (const json& v : j.at("values"))
                values.push_back(v.is_null() ? kNaN : v.get<double>());
        } else if (j.is_object() && j.contains("value")) {
            const json& v = j.at("value");
            values.push_back(v.is_null() ? kNaN : v.get<double>());
        } else {
            throw std::runtime_error("unrecognized JSONL series record");
        }
    }
    return values;
}

}  // namespace

std::vector<double> load_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<double> values;
    if (path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0)
        values = load_series_jsonl(in);
    else
        values = load_series_csv(in);
    if (values.empty()) throw std::runtime_error("no values in series file: " + path);
    return values;
}

}  // namespace reverso
