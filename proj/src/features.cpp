#include "hyperdet/features.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "hyperdet/error.hpp"
#include "hyperdet/stats.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

std::optional<std::size_t> feature_index(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
        if (kFeatureNames[i] == name) return i;
    }
    return std::nullopt;
}

namespace {

std::vector<double> present_values(const std::vector<std::optional<double>>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        if (x) out.push_back(*x);
    }
    return out;
}

}  // namespace

FeatureResult extract_features(const Window& w) {
    const std::vector<double> hr = present_values(w.hr);
    const std::vector<double> mag = present_values(w.acc_mag);
    if (hr.size() < 2) {
        return {std::nullopt, "fewer than 2 present heart-rate values"};
    }
    if (mag.size() < 2) {
        return {std::nullopt, "fewer than 2 present acceleration magnitudes"};
    }

    FeatureVector f;
    f.hrmean = mean(hr);
    f.hrmax = *std::max_element(hr.begin(), hr.end());
    f.hrmin = *std::min_element(hr.begin(), hr.end());
    f.hrsd = std::sqrt(sample_variance(hr));
    f.hrrange = f.hrmax - f.hrmin;
    f.linaccmean = mean(mag);
    f.linaccmax = *std::max_element(mag.begin(), mag.end());
    f.linaccmin = *std::min_element(mag.begin(), mag.end());
    f.linaccrange = f.linaccmax - f.linaccmin;
    f.label = w.label;
    f.participant_id = w.participant_id;
    f.window_start = w.start;
    return {f, ""};
}

void write_features(const Dataset& rows, const std::filesystem::path& path) {
    std::ostringstream ss;
    ss << "participant_id,window_start,hrmean,hrmax,hrmin,hrsd,hrrange,"
          "linaccmean,linaccmax,linaccmin,linaccrange,label\n";
    for (const auto& r : rows) {
        ss << r.participant_id << ',' << format_int(r.window_start);
        for (const double v : r.values()) ss << ',' << format_real(v);
        ss << ',' << r.label << '\n';
    }
    write_file_atomic(path, ss.str());
}

Dataset read_features(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) ||
        line != "participant_id,window_start,hrmean,hrmax,hrmin,hrsd,hrrange,"
                "linaccmean,linaccmax,linaccmin,linaccrange,label") {
        throw DataError(path.string() + ": bad feature file header");
    }
    Dataset rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 12) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 12 fields, got " + std::to_string(fields.size()));
        }
        FeatureVector f;
        f.participant_id = fields[0];
        const auto ws = parse_int(fields[1]);
        if (!ws) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad window_start");
        }
        f.window_start = *ws;
        double vals[9];
        for (int i = 0; i < 9; ++i) {
            const auto v = parse_real(fields[2 + i]);
            if (!v || !std::isfinite(*v)) {
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": bad value in column " + std::string(kFeatureNames[i]));
            }
            vals[i] = *v;
        }
        f.hrmean = vals[0];
        f.hrmax = vals[1];
        f.hrmin = vals[2];
        f.hrsd = vals[3];
        f.hrrange = vals[4];
        f.linaccmean = vals[5];
        f.linaccmax = vals[6];
        f.linaccmin = vals[7];
        f.linaccrange = vals[8];
        if (fields[11] != "0" && fields[11] != "1") {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": label must be 0 or 1");
        }
        f.label = fields[11] == "1" ? 1 : 0;
        rows.push_back(std::move(f));
    }
    return rows;
}

std::vector<std::string> participants(const Dataset& data) {
    std::set<std::string> ids;
    for (const auto& r : data) ids.insert(r.participant_id);
    return {ids.begin(), ids.end()};
}

std::pair<std::size_t, std::size_t> class_counts(const Dataset& data) {
    std::size_t neg = 0, pos = 0;
    for (const auto& r : data) (r.label == 1 ? pos : neg) += 1;
    return {neg, pos};
}

}  // namespace hyperdet
