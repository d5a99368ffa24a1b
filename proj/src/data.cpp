#include "imbench/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace imbench {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::string unquote(std::string s) {
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool is_missing(const std::string& s) { return s.empty() || s == "?" || s == "<null>" || lower(s) == "na"; }

std::string stem_name(const std::filesystem::path& path) { return path.stem().string(); }

std::string describe_rows(const std::vector<std::size_t>& rows) {
    std::ostringstream os;
    const std::size_t shown = std::min<std::size_t>(rows.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << rows[i];
    if (rows.size() > shown) os << ", ... (" << rows.size() << " total)";
    return os.str();
}

/// Maps raw class strings to {0,1}. "positive"/"negative" pairs map by name,
/// otherwise the minority becomes 1 (ties: the later-declared value).
struct LabelMapping {
    std::array<std::string, 2> names;
    std::map<std::string, int> index;
};

LabelMapping map_labels(const std::vector<std::string>& declared, const std::vector<std::string>& raw,
                        const std::optional<std::string>& positive_label, const std::string& where) {
    std::vector<std::string> values = declared;
    for (const auto& r : raw) {
        if (std::find(values.begin(), values.end(), r) == values.end()) {
            if (!declared.empty()) throw DataError(where + ": class value '" + r + "' not declared");
            values.push_back(r);
        }
    }
    if (values.size() != 2) {
        throw DataError(where + ": expected exactly 2 class values, found " + std::to_string(values.size()));
    }

    LabelMapping m;
    int positive = -1;
    if (positive_label) {
        for (int v = 0; v < 2; ++v) {
            if (values[static_cast<std::size_t>(v)] == *positive_label) positive = v;
        }
        if (positive < 0) throw DataError(where + ": positive label '" + *positive_label + "' not found");
    } else {
        const auto a = lower(values[0]), b = lower(values[1]);
        if (a == "positive" && b == "negative") positive = 0;
        else if (a == "negative" && b == "positive") positive = 1;
        else {
            std::array<std::size_t, 2> n{0, 0};
            for (const auto& r : raw) ++n[r == values[0] ? 0 : 1];
            positive = n[0] < n[1] ? 0 : 1;
        }
    }
    m.names[1] = values[static_cast<std::size_t>(positive)];
    m.names[0] = values[static_cast<std::size_t>(1 - positive)];
    m.index[m.names[0]] = 0;
    m.index[m.names[1]] = 1;
    return m;
}

struct KeelAttribute {
    std::string name;
    bool nominal = false;
    std::vector<std::string> values;  // nominal only
};

KeelAttribute parse_attribute(const std::string& body, const std::string& where) {
    // body: "<name> <type>[range]" or "<name> {a, b}" or "<name>{a,b}"
    KeelAttribute a;
    std::size_t brace = body.find('{');
    std::string head = trim(body.substr(0, brace));
    if (head.empty()) throw DataError(where + ": @attribute without a name");
    std::size_t sp = head.find_first_of(" \t");
    a.name = unquote(trim(head.substr(0, sp)));
    if (brace != std::string::npos) {
        const std::size_t close = body.find('}', brace);
        if (close == std::string::npos) throw DataError(where + ": unterminated nominal value list");
        a.nominal = true;
        for (auto& v : split_fields(body.substr(brace + 1, close - brace - 1))) a.values.push_back(unquote(v));
        return a;
    }
    if (sp == std::string::npos) throw DataError(where + ": @attribute '" + a.name + "' has no type");
    std::string type = lower(trim(head.substr(sp)));
    type = type.substr(0, type.find('['));
    type = trim(type);
    if (type != "real" && type != "integer" && type != "numeric") {
        throw DataError(where + ": unsupported attribute type '" + type + "'");
    }
    return a;
}

std::vector<std::string> parse_name_list(const std::string& body) {
    std::vector<std::string> out;
    for (auto& n : split_fields(body)) {
        if (!n.empty()) out.push_back(unquote(n));
    }
    return out;
}

}  // namespace

Dataset load_keel_dat(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    const std::string file = path.string();

    std::vector<KeelAttribute> attributes;
    std::vector<std::string> inputs, outputs;
    std::string relation;
    bool in_data = false;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;
        const std::string where = file + ":" + std::to_string(line_no);
        if (!in_data) {
            if (t[0] != '@') throw DataError(where + ": expected a header directive before @data");
            const std::size_t sp = t.find_first_of(" \t{");
            const std::string directive = lower(t.substr(0, sp));
            const std::string body = sp == std::string::npos ? "" : trim(t.substr(sp));
            if (directive == "@relation") relation = unquote(body);
            else if (directive == "@attribute") attributes.push_back(parse_attribute(body, where));
            else if (directive == "@inputs" || directive == "@input") inputs = parse_name_list(body);
            else if (directive == "@outputs" || directive == "@output") outputs = parse_name_list(body);
            else if (directive == "@data") in_data = true;
            else throw DataError(where + ": unknown directive '" + directive + "'");
            continue;
        }
        rows.push_back(split_fields(t));
        row_lines.push_back(line_no);
    }
    if (!in_data) throw DataError(file + ": missing @data section");
    if (attributes.size() < 2) throw DataError(file + ": need at least one input and one class attribute");

    auto find_attr = [&](const std::string& name) {
        for (std::size_t i = 0; i < attributes.size(); ++i) {
            if (attributes[i].name == name) return i;
        }
        throw DataError(file + ": @inputs/@outputs names unknown attribute '" + name + "'");
    };
    const std::size_t class_attr = outputs.empty() ? attributes.size() - 1 : find_attr(outputs.back());
    std::vector<std::size_t> input_attrs;
    if (!inputs.empty()) {
        for (const auto& n : inputs) input_attrs.push_back(find_attr(n));
    } else {
        for (std::size_t i = 0; i < attributes.size(); ++i) {
            if (i != class_attr) input_attrs.push_back(i);
        }
    }

    std::vector<std::size_t> missing_rows;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != attributes.size()) {
            throw DataError(file + ":" + std::to_string(row_lines[r]) + ": expected " +
                            std::to_string(attributes.size()) + " values, found " + std::to_string(rows[r].size()));
        }
        for (const auto& v : rows[r]) {
            if (is_missing(v)) {
                missing_rows.push_back(r);
                break;
            }
        }
    }
    if (!missing_rows.empty()) {
        throw DataError(file + ": missing values in data rows " + describe_rows(missing_rows));
    }

    Dataset d;
    d.name = relation.empty() ? stem_name(path) : relation;
    d.features = Matrix(rows.size(), input_attrs.size());
    for (auto a : input_attrs) d.feature_names.push_back(attributes[a].name);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t j = 0; j < input_attrs.size(); ++j) {
            const auto& attr = attributes[input_attrs[j]];
            const auto& raw = rows[r][input_attrs[j]];
            const std::string where = file + ":" + std::to_string(row_lines[r]);
            if (attr.nominal) {
                auto it = std::find(attr.values.begin(), attr.values.end(), unquote(raw));
                if (it == attr.values.end()) {
                    throw DataError(where + ": value '" + raw + "' not declared for attribute '" + attr.name + "'");
                }
                d.features(r, j) = static_cast<double>(it - attr.values.begin());
            } else {
                auto v = parse_number(raw);
                if (!v) throw DataError(where + ": non-numeric value '" + raw + "' for attribute '" + attr.name + "'");
                d.features(r, j) = *v;
            }
        }
    }

    std::vector<std::string> raw_labels;
    raw_labels.reserve(rows.size());
    const auto& declared = attributes[class_attr].values;
    for (const auto& row : rows) {
        std::string v = unquote(row[class_attr]);
        // class names compare case-insensitively against the declaration
        if (std::find(declared.begin(), declared.end(), v) == declared.end()) {
            for (const auto& c : declared) {
                if (lower(c) == lower(v)) v = c;
            }
        }
        raw_labels.push_back(std::move(v));
    }
    const auto mapping = map_labels(attributes[class_attr].values, raw_labels, std::nullopt, file);
    d.class_names = mapping.names;
    for (const auto& r : raw_labels) d.labels.push_back(mapping.index.at(r));
    d.counts = ClassCounts::from_labels(d.labels);
    return d;
}

Dataset load_csv(const std::filesystem::path& path, const ColumnRef& label_column,
                 const std::optional<std::string>& positive_label) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    const std::string file = path.string();

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) header = split_fields(line);
    }
    if (header.empty()) throw DataError(file + ": missing header row");
    for (auto& h : header) h = unquote(h);

    std::size_t label_idx = 0;
    if (const auto* name = std::get_if<std::string>(&label_column)) {
        auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) throw DataError(file + ": no column named '" + *name + "'");
        label_idx = static_cast<std::size_t>(it - header.begin());
    } else {
        label_idx = std::get<std::size_t>(label_column);
        if (label_idx >= header.size()) throw DataError(file + ": label column index out of range");
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> missing_rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError(file + ":" + std::to_string(line_no) + ": ragged row with " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        }
        for (const auto& f : fields) {
            if (is_missing(f)) {
                missing_rows.push_back(rows.size());
                break;
            }
        }
        rows.push_back(std::move(fields));
    }
    if (!missing_rows.empty()) throw DataError(file + ": missing values in data rows " + describe_rows(missing_rows));
    if (rows.empty()) throw DataError(file + ": no data rows");

    Dataset d;
    d.name = stem_name(path);
    const std::size_t dim = header.size() - 1;
    d.features = Matrix(rows.size(), dim);
    std::size_t j = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == label_idx) continue;
        d.feature_names.push_back(header[c]);
        bool numeric = true;
        for (const auto& row : rows) numeric = numeric && parse_number(row[c]).has_value();
        std::vector<std::string> levels;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (numeric) {
                d.features(r, j) = *parse_number(rows[r][c]);
                continue;
            }
            const std::string v = unquote(rows[r][c]);
            auto it = std::find(levels.begin(), levels.end(), v);
            if (it == levels.end()) it = levels.insert(levels.end(), v);
            d.features(r, j) = static_cast<double>(it - levels.begin());
        }
        ++j;
    }

    std::vector<std::string> raw_labels;
    for (const auto& row : rows) raw_labels.push_back(unquote(row[label_idx]));
    const auto mapping = map_labels({}, raw_labels, positive_label, file);
    d.class_names = mapping.names;
    for (const auto& r : raw_labels) d.labels.push_back(mapping.index.at(r));
    d.counts = ClassCounts::from_labels(d.labels);
    return d;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& n : data.feature_names) out << n << ',';
    out << "class\n";
    char buf[32];
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.dimension(); ++c) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, data.features(r, c));
            out.write(buf, ptr - buf);
            out << ',';
        }
        out << data.class_names[static_cast<std::size_t>(data.labels[r])] << '\n';
    }
    if (!out) throw DataError("write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    if (lower(path.extension().string()) == ".dat") return load_keel_dat(path);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    const auto n = split_fields(header).size();
    if (n < 2) throw DataError(path.string() + ": need at least one feature and one label column");
    return load_csv(path, ColumnRef{n - 1});
}

double imbalance_ratio(const ClassCounts& counts) {
    const auto lo = std::min(counts[0], counts[1]);
    const auto hi = std::max(counts[0], counts[1]);
    if (lo == 0) throw std::invalid_argument("imbalance_ratio: minority count is zero");
    return static_cast<double>(hi) / static_cast<double>(lo);
}

double silhouette_coefficient(const Matrix& features, std::span<const int> labels, std::size_t max_n, Rng& rng) {
    if (features.rows != labels.size()) throw std::invalid_argument("silhouette: feature rows and label count differ");
    const auto counts = ClassCounts::from_labels(labels);
    for (int c = 0; c < 2; ++c) {
        if (counts[c] < 2) {
            throw std::invalid_argument("silhouette: class " + std::to_string(c) + " has fewer than 2 samples");
        }
    }

    std::vector<std::size_t> rows(labels.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (max_n >= 4 && labels.size() > max_n) {
        std::vector<std::size_t> picked;
        for (int c = 0; c < 2; ++c) {
            std::vector<std::size_t> pool;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] == c) pool.push_back(i);
            }
            const double share = static_cast<double>(pool.size()) / static_cast<double>(labels.size());
            const auto take_n = std::clamp<std::size_t>(
                static_cast<std::size_t>(std::llround(share * static_cast<double>(max_n))), 2, pool.size());
            shuffle(std::span(pool), rng);
            picked.insert(picked.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take_n));
        }
        std::sort(picked.begin(), picked.end());
        rows = std::move(picked);
    }

    const std::size_t n = rows.size(), d = features.cols;
    std::array<std::size_t, 2> class_n{0, 0};
    for (auto r : rows) ++class_n[static_cast<std::size_t>(labels[r])];

    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        std::array<double, 2> dist_sum{0.0, 0.0};
        const double* xa = features.values.data() + rows[a] * d;
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const double* xb = features.values.data() + rows[b] * d;
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = xa[k] - xb[k];
                s += diff * diff;
            }
            dist_sum[static_cast<std::size_t>(labels[rows[b]])] += std::sqrt(s);
        }
        const auto own = static_cast<std::size_t>(labels[rows[a]]);
        const double intra = dist_sum[own] / static_cast<double>(class_n[own] - 1);
        const double inter = dist_sum[1 - own] / static_cast<double>(class_n[1 - own]);
        const double denom = std::max(intra, inter);
        total += denom > 0.0 ? (inter - intra) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

DatasetProfile profile_dataset(const Dataset& data, std::uint64_t seed, std::size_t silhouette_max_n) {
    DatasetProfile p;
    p.name = data.name;
    p.samples = data.size();
    p.features = data.dimension();
    const auto maj = static_cast<double>(std::max(data.counts[0], data.counts[1]));
    const auto n = static_cast<double>(data.counts.total());
    p.percent_majority = 100.0 * maj / n;
    p.percent_minority = 100.0 - p.percent_majority;
    p.imbalance_ratio = imbalance_ratio(data.counts);
    Rng rng(seed);
    const Matrix z = Standardizer::fit(data.features).apply(data.features);
    p.silhouette = silhouette_coefficient(z, data.labels, silhouette_max_n, rng);
    return p;
}

Standardizer Standardizer::fit(const Matrix& train) {
    if (train.rows == 0) throw std::invalid_argument("Standardizer: empty training matrix");
    Standardizer s;
    s.mean.assign(train.cols, 0.0);
    s.stddev.assign(train.cols, 0.0);
    for (std::size_t i = 0; i < train.rows; ++i) {
        for (std::size_t j = 0; j < train.cols; ++j) s.mean[j] += train(i, j);
    }
    for (auto& m : s.mean) m /= static_cast<double>(train.rows);
    for (std::size_t i = 0; i < train.rows; ++i) {
        for (std::size_t j = 0; j < train.cols; ++j) {
            const double diff = train(i, j) - s.mean[j];
            s.stddev[j] += diff * diff;
        }
    }
    for (auto& v : s.stddev) v = std::sqrt(v / static_cast<double>(train.rows));
    return s;
}

Matrix Standardizer::apply(const Matrix& m) const {
    if (m.cols != mean.size()) throw std::invalid_argument("Standardizer: column count mismatch");
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            out(i, j) = stddev[j] > 0.0 ? (m(i, j) - mean[j]) / stddev[j] : 0.0;
        }
    }
    return out;
}

std::vector<std::size_t> FoldSplit::training_rows(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < folds.size(); ++g) {
        if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

FoldSplit stratified_kfold(std::span<const int> labels, std::size_t k, Rng& rng) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    const auto counts = ClassCounts::from_labels(labels);
    for (int c = 0; c < 2; ++c) {
        if (counts[c] < k) {
            throw std::invalid_argument("stratified_kfold: class " + std::to_string(c) + " has " +
                                        std::to_string(counts[c]) + " samples, fewer than k=" + std::to_string(k));
        }
    }
    FoldSplit split;
    split.folds.resize(k);
    std::size_t next = 0;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) pool.push_back(i);
        }
        shuffle(std::span(pool), rng);
        for (auto i : pool) {
            split.folds[next].push_back(i);
            next = (next + 1) % k;
        }
    }
    for (auto& f : split.folds) std::sort(f.begin(), f.end());
    return split;
}

TrainValidationSplit train_val_split(std::span<const std::size_t> rows, std::span<const int> labels,
                                     double validation_fraction, Rng& rng) {
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("train_val_split: validation fraction must be in (0, 1)");
    }
    TrainValidationSplit out;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> pool;
        for (auto r : rows) {
            if (labels[r] == c) pool.push_back(r);
        }
        if (pool.empty()) throw std::invalid_argument("train_val_split: class " + std::to_string(c) + " is absent");
        if (pool.size() == 1) {
            out.warnings.push_back("class " + std::to_string(c) +
                                   " has a single training row; validation proceeds without it");
            out.train.push_back(pool[0]);
            continue;
        }
        shuffle(std::span(pool), rng);
        const auto want = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(pool.size())));
        const std::size_t n_val = std::clamp<std::size_t>(want, 1, pool.size() - 1);
        out.validation.insert(out.validation.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
        out.train.insert(out.train.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_val), pool.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

Dataset make_two_gaussians(std::size_t n_majority, std::size_t n_minority, double separation, std::size_t dim,
                           Rng& rng) {
    if (dim == 0) throw std::invalid_argument("make_two_gaussians: dimension must be >= 1");
    const std::size_t n = n_majority + n_minority;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span(order), rng);

    Dataset d;
    d.name = "two_gaussians";
    d.features = Matrix(n, dim);
    d.labels.assign(n, 0);
    for (std::size_t j = 0; j < dim; ++j) d.feature_names.push_back("x" + std::to_string(j));
    d.class_names = {"negative", "positive"};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = order[i];
        const int y = i < n_majority ? 0 : 1;
        d.labels[r] = y;
        for (std::size_t j = 0; j < dim; ++j) d.features(r, j) = standard_normal(rng) + (y == 1 ? separation : 0.0);
    }
    d.counts = ClassCounts::from_labels(d.labels);
    return d;
}

}  // namespace imbench
