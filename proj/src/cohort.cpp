#include "popgraph/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "popgraph/errors.hpp"
#include "popgraph/rng.hpp"

namespace popgraph {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const std::string t = trim(cell);
    if (t.empty())
        throw DataError("cohort: missing value at row " + std::to_string(row) + ", column '" +
                        column + "'");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v))
        throw DataError("cohort: non-numeric value '" + t + "' at row " + std::to_string(row) +
                        ", column '" + column + "'");
    return v;
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

} // namespace

void PhenotypeSchema::validate() const {
    if (phenotypes.empty()) throw ValidationError("schema: at least one phenotype required");
    if (imaging_features == 0) throw ValidationError("schema: at least one imaging feature required");
    std::unordered_set<std::string> seen;
    for (const auto& [name, kind] : phenotypes) {
        (void)kind;
        if (name.empty()) throw ValidationError("schema: empty phenotype name");
        if (!seen.insert(name).second)
            throw ValidationError("schema: duplicate phenotype name '" + name + "'");
    }
}

void Cohort::validate() const {
    schema.validate();
    if (imaging.size() != n * schema.imaging_features)
        throw ValidationError("cohort: imaging matrix size mismatch");
    if (phenotypes.size() != n * schema.count())
        throw ValidationError("cohort: phenotype matrix size mismatch");
    if (age.size() != n) throw ValidationError("cohort: age vector size mismatch");
    for (const double a : age)
        if (!std::isfinite(a)) throw ValidationError("cohort: non-finite age");
}

NormalizeResult normalize(const Cohort& cohort) {
    NormalizeResult out;
    out.cohort = cohort;
    const std::size_t m = cohort.schema.imaging_features;
    const std::size_t k = cohort.schema.count();
    out.imaging_scales.resize(m);
    out.phenotype_scales.resize(k);

    auto scale_column = [&](std::vector<double>& data, std::size_t width, std::size_t col) {
        double lo = data[col], hi = data[col];
        for (std::size_t i = 0; i < cohort.n; ++i) {
            lo = std::min(lo, data[i * width + col]);
            hi = std::max(hi, data[i * width + col]);
        }
        if (hi > lo) {
            const double span = hi - lo;
            for (std::size_t i = 0; i < cohort.n; ++i)
                data[i * width + col] = (data[i * width + col] - lo) / span;
        } else {
            // Constant column: no information, map to zeros.
            for (std::size_t i = 0; i < cohort.n; ++i) data[i * width + col] = 0.0;
        }
        return ColumnScale{lo, hi, true};
    };

    if (cohort.n > 0) {
        for (std::size_t c = 0; c < m; ++c)
            out.imaging_scales[c] = scale_column(out.cohort.imaging, m, c);
        for (std::size_t c = 0; c < k; ++c) {
            if (cohort.schema.phenotypes[c].second == PhenotypeKind::continuous)
                out.phenotype_scales[c] = scale_column(out.cohort.phenotypes, k, c);
            else
                out.phenotype_scales[c] = ColumnScale{0.0, 0.0, false};
        }
    }
    return out;
}

Split split_cohort(std::size_t n, std::array<double, 3> fractions, std::uint64_t seed) {
    double sum = 0.0;
    for (const double f : fractions) {
        if (f <= 0.0) throw ValidationError("split: fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("split: fractions sum to " + std::to_string(sum) + ", expected 1");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(perm);

    const auto n_train = static_cast<std::size_t>(std::floor(fractions[0] * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * static_cast<double>(n)));

    Split s;
    s.fractions = fractions;
    s.seed = seed;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    s.test.assign(perm.begin() + n_train + n_val, perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void write_cohort(const Cohort& cohort, const std::filesystem::path& csv, char sep) {
    cohort.validate();
    std::ofstream os(csv);
    if (!os) throw DataError("cohort: cannot open '" + csv.string() + "' for writing");
    std::string line = "age";
    for (std::size_t c = 0; c < cohort.schema.imaging_features; ++c)
        line += sep + std::string("img_") + std::to_string(c);
    for (const auto& [name, kind] : cohort.schema.phenotypes) {
        (void)kind;
        line += sep + name;
    }
    os << line << "\n";
    for (std::size_t i = 0; i < cohort.n; ++i) {
        line.clear();
        format_double(line, cohort.age[i]);
        for (std::size_t c = 0; c < cohort.schema.imaging_features; ++c) {
            line += sep;
            format_double(line, cohort.img(i, c));
        }
        for (std::size_t c = 0; c < cohort.schema.count(); ++c) {
            line += sep;
            format_double(line, cohort.phen(i, c));
        }
        os << line << "\n";
    }
    if (!os) throw DataError("cohort: write failed for '" + csv.string() + "'");
}

Cohort load_cohort(const std::filesystem::path& csv, const PhenotypeSchema& schema, char sep) {
    schema.validate();
    std::ifstream is(csv);
    if (!is) throw DataError("cohort: cannot open '" + csv.string() + "'");
    std::string line;
    if (!std::getline(is, line) || trim(line).empty())
        throw DataError("cohort: '" + csv.string() + "' is empty");

    const std::vector<std::string> header = split_line(trim(line), sep);
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (!pos.emplace(name, c).second)
            throw DataError("cohort: duplicate column '" + name + "'");
    }
    auto require = [&](const std::string& name) {
        const auto it = pos.find(name);
        if (it == pos.end()) throw DataError("cohort: missing column '" + name + "'");
        return it->second;
    };

    const std::size_t m = schema.imaging_features;
    const std::size_t k = schema.count();
    if (header.size() != 1 + m + k)
        throw DataError("cohort: header has " + std::to_string(header.size()) + " columns, expected " +
                        std::to_string(1 + m + k) + " (age + " + std::to_string(m) + " imaging + " +
                        std::to_string(k) + " phenotypes)");

    const std::size_t age_col = require("age");
    std::vector<std::size_t> img_cols(m);
    for (std::size_t c = 0; c < m; ++c) img_cols[c] = require("img_" + std::to_string(c));
    std::vector<std::size_t> phen_cols(k);
    for (std::size_t c = 0; c < k; ++c) phen_cols[c] = require(schema.phenotypes[c].first);

    Cohort cohort;
    cohort.schema = schema;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line, sep);
        if (cells.size() != header.size())
            throw DataError("cohort: row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        cohort.age.push_back(parse_cell(cells[age_col], row, "age"));
        for (std::size_t c = 0; c < m; ++c)
            cohort.imaging.push_back(parse_cell(cells[img_cols[c]], row, header[img_cols[c]]));
        for (std::size_t c = 0; c < k; ++c)
            cohort.phenotypes.push_back(parse_cell(cells[phen_cols[c]], row, header[phen_cols[c]]));
        cohort.n += 1;
    }
    if (cohort.n == 0) throw DataError("cohort: '" + csv.string() + "' has no data rows");
    cohort.validate();
    return cohort;
}

PhenotypeSchema load_schema(const std::filesystem::path& path, std::size_t imaging_features) {
    std::ifstream is(path);
    if (!is) throw DataError("schema: cannot open '" + path.string() + "'");
    PhenotypeSchema schema;
    schema.imaging_features = imaging_features;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.rfind("imaging_features=", 0) == 0) {
            schema.imaging_features = static_cast<std::size_t>(
                std::strtoull(t.c_str() + std::string("imaging_features=").size(), nullptr, 10));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError("schema: line " + std::to_string(lineno) + " is not 'name=kind': '" + t +
                            "'");
        const std::string name = trim(t.substr(0, eq));
        const std::string kind = trim(t.substr(eq + 1));
        if (kind == "categorical")
            schema.phenotypes.emplace_back(name, PhenotypeKind::categorical);
        else if (kind == "continuous")
            schema.phenotypes.emplace_back(name, PhenotypeKind::continuous);
        else
            throw DataError("schema: unknown kind '" + kind + "' for phenotype '" + name + "'");
    }
    return schema;
}

void write_schema(const PhenotypeSchema& schema, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("schema: cannot open '" + path.string() + "' for writing");
    os << "imaging_features=" << schema.imaging_features << "\n";
    for (const auto& [name, kind] : schema.phenotypes)
        os << name << "=" << (kind == PhenotypeKind::categorical ? "categorical" : "continuous")
           << "\n";
}

} // namespace popgraph
