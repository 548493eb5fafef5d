#pragma once

// CSV and JSON persistence. Numbers go through std::to_chars/from_chars, so
// files use '.' decimals regardless of locale and every double round-trips.

#include <hydrores/encoding.hpp>
#include <hydrores/errors.hpp>
#include <hydrores/evolution.hpp>
#include <hydrores/kdv.hpp>
#include <hydrores/reservoir.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace hydrores::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("cannot format number");
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("cannot parse number '" + std::string(s) + "'");
    return v;
}

inline long long parse_int(std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("cannot parse integer '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

/// Minimal CSV writer; one header row, '\n' line endings.
class CsvWriter {
public:
    explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw Error("cannot open '" + path.string() + "' for writing");
    }

    CsvWriter& header(std::initializer_list<std::string_view> cols) {
        bool first = true;
        for (auto c : cols) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
        return *this;
    }

    CsvWriter& header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << '\n';
        return *this;
    }

    CsvWriter& cell(std::string_view s) {
        sep();
        out_ << s;
        return *this;
    }
    CsvWriter& cell(double v) { return cell(std::string_view(format_double(v))); }
    CsvWriter& cell(long long v) { return cell(std::string_view(std::to_string(v))); }
    CsvWriter& cell(std::size_t v) { return cell(std::string_view(std::to_string(v))); }
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(bool v) { return cell(std::string_view(v ? "1" : "0")); }

    void end_row() {
        out_ << '\n';
        fresh_ = true;
    }

private:
    void sep() {
        if (!fresh_) out_ << ',';
        fresh_ = false;
    }

    std::ofstream out_;
    bool fresh_ = true;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error("missing CSV column '" + std::string(name) + "'");
    }
};

inline CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty CSV '" + path.string() + "'");
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
        if (t.rows.back().size() != t.header.size()) throw Error("ragged CSV row in '" + path.string() + "'");
    }
    return t;
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

// Genotypes --------------------------------------------------------------

inline json genotype_to_json(const Genotype& g) {
    return {{"scheme", to_string(g.scheme)}, {"readout_times", g.readout_times}, {"encoding_genes", g.encoding_genes}};
}

inline Genotype genotype_from_json(const json& j) {
    Genotype g;
    g.scheme = parse_scheme(j.at("scheme").get<std::string>());
    g.readout_times = j.at("readout_times").get<std::vector<double>>();
    g.encoding_genes = j.at("encoding_genes").get<std::vector<double>>();
    g.validate();
    return g;
}

/// Flat record: scheme tag, then the time genes, then the encoding genes.
inline std::vector<std::string> genotype_record(const Genotype& g) {
    std::vector<std::string> out{std::string(to_string(g.scheme))};
    for (double v : g.readout_times) out.push_back(format_double(v));
    for (double v : g.encoding_genes) out.push_back(format_double(v));
    return out;
}

inline Genotype parse_genotype_record(std::span<const std::string> rec, std::size_t n_times) {
    if (rec.empty() || rec.size() < 1 + n_times) throw Error("genotype record too short");
    Genotype g;
    g.scheme = parse_scheme(rec[0]);
    for (std::size_t i = 0; i < n_times; ++i) g.readout_times.push_back(parse_double(rec[1 + i]));
    for (std::size_t i = 1 + n_times; i < rec.size(); ++i) g.encoding_genes.push_back(parse_double(rec[i]));
    g.validate();
    return g;
}

// Archives ---------------------------------------------------------------

struct ArchiveRow {
    std::size_t id = 0;  // cell index, row * cols + col
    std::size_t row = 0;
    std::size_t col = 0;
    double mean = 0.0;
    double std = 0.0;
    double fitness = 0.0;
    std::size_t eval_index = 0;
    Genotype genotype;
};

inline std::vector<std::string> archive_header(const Genotype& g) {
    std::vector<std::string> h{"id", "row", "col", "mean", "std", "fitness", "eval_index", "scheme"};
    for (std::size_t i = 0; i < g.readout_times.size(); ++i) h.push_back("t_" + std::to_string(i));
    for (std::size_t i = 0; i < g.encoding_genes.size(); ++i) h.push_back("g_" + std::to_string(i));
    return h;
}

inline std::vector<ArchiveRow> archive_rows(const Archive& a) {
    std::vector<ArchiveRow> rows;
    for (std::size_t idx : a.occupied()) {
        const auto& ind = *a.at(idx);
        const Cell c = a.cell(idx);
        rows.push_back({idx, c.row, c.col, ind.descriptor.mean, ind.descriptor.std, ind.fitness, ind.eval_index, ind.genotype});
    }
    return rows;
}

inline void write_archive_csv(const fs::path& path, std::span<const ArchiveRow> rows) {
    CsvWriter w(path);
    if (rows.empty()) {
        w.header({"id", "row", "col", "mean", "std", "fitness", "eval_index", "scheme"});
        return;
    }
    w.header(archive_header(rows.front().genotype));
    for (const auto& r : rows) {
        w.cell(r.id).cell(r.row).cell(r.col).cell(r.mean).cell(r.std).cell(r.fitness).cell(r.eval_index);
        for (const auto& s : genotype_record(r.genotype)) w.cell(std::string_view(s));
        w.end_row();
    }
}

inline void write_archive_csv(const fs::path& path, const Archive& a) {
    const auto rows = archive_rows(a);
    write_archive_csv(path, rows);
}

inline std::vector<ArchiveRow> read_archive_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    std::size_t n_times = 0;
    for (const auto& h : t.header)
        if (h.rfind("t_", 0) == 0) ++n_times;
    const std::size_t scheme_col = t.column("scheme");
    std::vector<ArchiveRow> out;
    for (const auto& r : t.rows) {
        ArchiveRow a;
        a.id = static_cast<std::size_t>(parse_int(r[t.column("id")]));
        a.row = static_cast<std::size_t>(parse_int(r[t.column("row")]));
        a.col = static_cast<std::size_t>(parse_int(r[t.column("col")]));
        a.mean = parse_double(r[t.column("mean")]);
        a.std = parse_double(r[t.column("std")]);
        a.fitness = parse_double(r[t.column("fitness")]);
        a.eval_index = static_cast<std::size_t>(parse_int(r[t.column("eval_index")]));
        a.genotype = parse_genotype_record(std::span(r).subspan(scheme_col), n_times);
        out.push_back(std::move(a));
    }
    return out;
}

/// Best-per-cell merge of several archives over the same grid. Ties keep the
/// entry from the earlier archive.
inline std::vector<ArchiveRow> merge_archives(std::span<const std::vector<ArchiveRow>> archives) {
    std::vector<ArchiveRow> merged;
    for (const auto& a : archives)
        for (const auto& r : a) {
            auto it = std::find_if(merged.begin(), merged.end(), [&](const ArchiveRow& m) { return m.id == r.id; });
            if (it == merged.end())
                merged.push_back(r);
            else if (r.fitness > it->fitness)
                *it = r;
        }
    std::sort(merged.begin(), merged.end(), [](const ArchiveRow& a, const ArchiveRow& b) { return a.id < b.id; });
    return merged;
}

inline void write_log_csv(const fs::path& path, std::span<const EvalLogEntry> log) {
    CsvWriter w(path);
    w.header({"eval_index", "fitness", "row", "col", "accepted", "diverged"});
    for (const auto& e : log) {
        w.cell(e.eval_index).cell(e.fitness);
        if (e.cell)
            w.cell(e.cell->row).cell(e.cell->col);
        else
            w.cell(-1).cell(-1);
        w.cell(e.accepted).cell(e.diverged);
        w.end_row();
    }
}

inline void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m, std::span<const double> col_times) {
    CsvWriter w(path);
    std::vector<std::string> h{"observation"};
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        h.push_back(col_times.size() == static_cast<std::size_t>(m.cols()) ? "t=" + format_double(col_times[static_cast<std::size_t>(j)])
                                                                            : "r_" + std::to_string(j));
    w.header(h);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        w.cell(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < m.cols(); ++j) w.cell(m(i, j));
        w.end_row();
    }
}

inline void write_field_csv(const fs::path& path, const WaveField& f) {
    CsvWriter w(path);
    w.header({"xi", "u"});
    for (std::size_t i = 0; i < f.heights.size(); ++i) {
        w.cell(f.grid.coord(i)).cell(f.heights[i]);
        w.end_row();
    }
}

} // namespace hydrores::io
