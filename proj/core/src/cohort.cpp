#include "survood/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "survood/io.hpp"

namespace survood {

const std::vector<std::string>& default_acquisition_vocabulary() {
    static const std::vector<std::string> vocab{"pixel_spacing", "exposure_time", "slice_thickness",
                                                "tube_current"};
    return vocab;
}

std::optional<double> Sample::acquisition_value(const std::string& name) const {
    if (auto it = acquisition.find(name); it != acquisition.end()) return it->second;
    return std::nullopt;
}

Cohort::Cohort(std::vector<Sample> samples, std::vector<std::string> feature_names)
    : samples_(std::move(samples)), feature_names_(std::move(feature_names)) {
    if (feature_names_.empty()) throw InputError("cohort: feature dimension must be positive");
    index_.reserve(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const Sample& s = samples_[i];
        if (s.features.size() != feature_names_.size()) {
            throw InputError("cohort: sample '" + s.id + "' has " + std::to_string(s.features.size()) +
                             " features, expected " + std::to_string(feature_names_.size()));
        }
        for (std::size_t j = 0; j < s.features.size(); ++j) {
            if (!std::isfinite(s.features[j])) {
                throw InputError("cohort: sample '" + s.id + "' has non-finite feature '" +
                                 feature_names_[j] + "'");
            }
        }
        if (!std::isfinite(s.time) || s.time < 0.0) {
            throw InputError("cohort: sample '" + s.id + "' has invalid time");
        }
        for (const auto& [name, value] : s.acquisition) {
            if (!std::isfinite(value)) {
                throw InputError("cohort: sample '" + s.id + "' has non-finite acquisition '" + name + "'");
            }
        }
        if (!index_.emplace(s.id, i).second) throw InputError("cohort: duplicate id '" + s.id + "'");
    }
}

std::optional<std::size_t> Cohort::index_of(const std::string& id) const {
    if (auto it = index_.find(id); it != index_.end()) return it->second;
    return std::nullopt;
}

Cohort Cohort::subset(std::span<const std::string> ids) const {
    std::vector<Sample> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto idx = index_of(id);
        if (!idx) throw InputError("cohort: unknown id '" + id + "'");
        out.push_back(samples_[*idx]);
    }
    return Cohort(std::move(out), feature_names_);
}

namespace {

std::string describe(const std::string& source, const std::vector<RowDiagnostic>& diags) {
    std::ostringstream ss;
    ss << source << ": " << diags.size() << " invalid row(s)";
    for (const auto& d : diags) {
        ss << "\n  line " << d.line;
        if (!d.column.empty()) ss << ", column '" << d.column << "'";
        ss << ": " << d.message;
    }
    return ss.str();
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() > prefix.size() && s.substr(0, prefix.size()) == prefix;
}

}  // namespace

CohortLoadError::CohortLoadError(std::string source, std::vector<RowDiagnostic> diagnostics)
    : InputError(describe(source, diagnostics)), diagnostics_(std::move(diagnostics)) {}

Cohort parse_cohort(std::string_view csv, const CohortSchema& schema, std::string_view source) {
    const std::string src(source);
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < csv.size();) {
        auto nl = csv.find('\n', pos);
        if (nl == std::string_view::npos) nl = csv.size();
        lines.push_back(csv.substr(pos, nl - pos));
        pos = nl + 1;
    }
    while (!lines.empty() && (lines.back().empty() || lines.back() == "\r")) lines.pop_back();
    if (lines.empty()) throw CohortLoadError(src, {{1, "", "missing header row"}});

    const auto header = io::split_csv_line(lines.front());
    std::optional<std::size_t> id_col, time_col, event_col;
    std::vector<std::pair<std::size_t, std::string>> feature_cols, acq_cols;
    std::vector<RowDiagnostic> diags;
    std::set<std::string> seen;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (!seen.insert(name).second) {
            diags.push_back({1, name, "duplicate column"});
        } else if (name == schema.id_column) {
            id_col = c;
        } else if (name == schema.time_column) {
            time_col = c;
        } else if (name == schema.event_column) {
            event_col = c;
        } else if (starts_with(name, schema.feature_prefix)) {
            feature_cols.emplace_back(c, name.substr(schema.feature_prefix.size()));
        } else if (starts_with(name, schema.acquisition_prefix)) {
            std::string param = name.substr(schema.acquisition_prefix.size());
            const auto& vocab = schema.acquisition_vocabulary;
            if (!vocab.empty() && std::find(vocab.begin(), vocab.end(), param) == vocab.end()) {
                diags.push_back({1, name, "acquisition parameter not in vocabulary"});
            }
            acq_cols.emplace_back(c, std::move(param));
        } else {
            diags.push_back({1, name, "unrecognized column"});
        }
    }
    if (!id_col) diags.push_back({1, schema.id_column, "required column missing"});
    if (!time_col) diags.push_back({1, schema.time_column, "required column missing"});
    if (!event_col) diags.push_back({1, schema.event_column, "required column missing"});
    if (feature_cols.empty()) diags.push_back({1, schema.feature_prefix + "*", "no feature columns"});
    if (!diags.empty()) throw CohortLoadError(src, std::move(diags));

    std::vector<std::string> feature_names;
    for (const auto& [c, name] : feature_cols) feature_names.push_back(name);

    std::vector<Sample> samples;
    std::unordered_map<std::string, std::size_t> first_line;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto cells = io::split_csv_line(lines[li]);
        if (cells.size() != header.size()) {
            diags.push_back({line_no, "", "expected " + std::to_string(header.size()) + " cells, found " +
                                              std::to_string(cells.size())});
            continue;
        }
        const std::size_t before = diags.size();
        Sample s;
        s.id = cells[*id_col];
        if (s.id.empty()) diags.push_back({line_no, header[*id_col], "empty id"});
        try {
            s.time = io::parse_double(cells[*time_col], "time");
            if (!std::isfinite(s.time) || s.time < 0.0) {
                diags.push_back({line_no, header[*time_col], "time must be finite and >= 0"});
            }
        } catch (const InputError& e) {
            diags.push_back({line_no, header[*time_col], e.what()});
        }
        const std::string& ev = cells[*event_col];
        if (ev == "1") {
            s.event = true;
        } else if (ev != "0") {
            diags.push_back({line_no, header[*event_col], "event must be 0 or 1, found '" + ev + "'"});
        }
        s.features.reserve(feature_cols.size());
        for (const auto& [c, name] : feature_cols) {
            try {
                const double v = io::parse_double(cells[c], "feature");
                if (!std::isfinite(v)) diags.push_back({line_no, header[c], "non-finite feature value"});
                s.features.push_back(v);
            } catch (const InputError& e) {
                diags.push_back({line_no, header[c], e.what()});
            }
        }
        for (const auto& [c, name] : acq_cols) {
            if (cells[c].empty()) continue;
            try {
                const double v = io::parse_double(cells[c], "acquisition");
                if (!std::isfinite(v)) diags.push_back({line_no, header[c], "non-finite acquisition value"});
                s.acquisition.emplace(name, v);
            } catch (const InputError& e) {
                diags.push_back({line_no, header[c], e.what()});
            }
        }
        if (!s.id.empty()) {
            auto [it, inserted] = first_line.emplace(s.id, line_no);
            if (!inserted) {
                diags.push_back({line_no, header[*id_col],
                                 "duplicate id '" + s.id + "' (first seen on line " + std::to_string(it->second) + ")"});
            }
        }
        if (diags.size() == before) samples.push_back(std::move(s));
    }
    if (!diags.empty()) throw CohortLoadError(src, std::move(diags));
    return Cohort(std::move(samples), std::move(feature_names));
}

Cohort load_cohort(const std::filesystem::path& path, const CohortSchema& schema) {
    if (!std::filesystem::exists(path)) throw InputError("cohort file not found: '" + path.string() + "'");
    return parse_cohort(io::read_file(path), schema, path.string());
}

std::string write_cohort(const Cohort& cohort, const CohortSchema& schema) {
    std::set<std::string> acq_names;
    for (const auto& s : cohort) {
        for (const auto& [name, v] : s.acquisition) acq_names.insert(name);
    }
    std::string out = schema.id_column + "," + schema.time_column + "," + schema.event_column;
    for (const auto& name : cohort.feature_names()) out += "," + schema.feature_prefix + name;
    for (const auto& name : acq_names) out += "," + schema.acquisition_prefix + name;
    out += '\n';
    for (const auto& s : cohort) {
        out += s.id;
        out += ',';
        out += io::format_double(s.time);
        out += s.event ? ",1" : ",0";
        for (double v : s.features) {
            out += ',';
            out += io::format_double(v);
        }
        for (const auto& name : acq_names) {
            out += ',';
            if (auto v = s.acquisition_value(name)) out += io::format_double(*v);
        }
        out += '\n';
    }
    return out;
}

void save_cohort(const std::filesystem::path& path, const Cohort& cohort, const CohortSchema& schema) {
    io::write_file(path, write_cohort(cohort, schema));
}

TimeGrid::TimeGrid(std::vector<double> boundaries) : boundaries_(std::move(boundaries)) {
    if (boundaries_.empty()) throw InputError("time grid: at least one boundary required");
    for (std::size_t i = 0; i < boundaries_.size(); ++i) {
        if (!std::isfinite(boundaries_[i]) || boundaries_[i] <= 0.0) {
            throw InputError("time grid: boundaries must be positive and finite");
        }
        if (i > 0 && !(boundaries_[i] > boundaries_[i - 1])) {
            throw InputError("time grid: boundaries must be strictly increasing");
        }
    }
}

GridStrategy parse_grid_strategy(std::string_view name) {
    if (name == "quantile") return GridStrategy::quantile;
    if (name == "uniform") return GridStrategy::uniform;
    throw InputError("unknown grid strategy '" + std::string(name) + "'");
}

std::string_view to_string(GridStrategy strategy) {
    return strategy == GridStrategy::quantile ? "quantile" : "uniform";
}

namespace {

// Linear-interpolation quantile of sorted data (the "type 7" estimator).
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

TimeGrid make_time_grid(const Cohort& cohort, std::size_t m, GridStrategy strategy) {
    if (cohort.empty()) throw InputError("make_time_grid: cohort is empty");
    if (m == 0) throw InputError("make_time_grid: m must be at least 1");

    std::vector<double> candidates;
    candidates.reserve(m);
    if (strategy == GridStrategy::uniform) {
        double lo = cohort[0].time, hi = cohort[0].time;
        for (const auto& s : cohort) {
            lo = std::min(lo, s.time);
            hi = std::max(hi, s.time);
        }
        for (std::size_t i = 1; i <= m; ++i) {
            candidates.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m));
        }
    } else {
        std::vector<double> times;
        for (const auto& s : cohort) {
            if (s.event) times.push_back(s.time);
        }
        if (times.empty()) {
            for (const auto& s : cohort) times.push_back(s.time);
        }
        std::sort(times.begin(), times.end());
        for (std::size_t i = 1; i <= m; ++i) {
            candidates.push_back(quantile_sorted(times, static_cast<double>(i) / static_cast<double>(m)));
        }
    }

    std::vector<double> boundaries;
    for (double b : candidates) {
        if (b <= 0.0) continue;
        if (boundaries.empty() || b > boundaries.back()) boundaries.push_back(b);
    }
    if (boundaries.size() < m) {
        throw InputError("make_time_grid: only " + std::to_string(boundaries.size()) +
                         " distinct positive boundaries for m = " + std::to_string(m));
    }
    return TimeGrid(std::move(boundaries));
}

std::size_t LabelEncoding::outcome_index() const {
    if (censored_) throw Error("label is censored; no outcome index");
    return index_;
}

std::size_t LabelEncoding::censor_floor() const {
    if (!censored_) throw Error("label is an observed event; no censor floor");
    return index_;
}

LabelEncoding encode_label(const Sample& sample, const TimeGrid& grid) {
    const auto& b = grid.boundaries();
    if (sample.event) {
        // smallest k with time <= t_{k+1}
        const auto it = std::lower_bound(b.begin(), b.end(), sample.time);
        return LabelEncoding::event_at(static_cast<std::size_t>(it - b.begin()));
    }
    // smallest c whose interval (t_c, t_{c+1}] still reaches past the censoring time
    const auto it = std::upper_bound(b.begin(), b.end(), sample.time);
    return LabelEncoding::censored_from(static_cast<std::size_t>(it - b.begin()));
}

std::vector<LabelEncoding> encode_labels(const Cohort& cohort, const TimeGrid& grid) {
    std::vector<LabelEncoding> out;
    out.reserve(cohort.size());
    for (const auto& s : cohort) out.push_back(encode_label(s, grid));
    return out;
}

}  // namespace survood
