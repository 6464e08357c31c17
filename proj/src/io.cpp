#include "hyperdet/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hyperdet/error.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

namespace {

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

void check_participant_id(const std::filesystem::path& path, std::size_t line_no,
                          const std::string& id) {
    if (id.empty()) fail_line(path, line_no, "empty participant_id");
}

std::optional<double> parse_optional_real(const std::filesystem::path& path, std::size_t line_no,
                                          const std::string& field, const std::string& name) {
    if (field.empty()) return std::nullopt;
    const auto v = parse_real(field);
    if (!v || !std::isfinite(*v)) fail_line(path, line_no, "malformed " + name + " value '" + field + "'");
    return v;
}

std::int64_t parse_timestamp(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& field) {
    const auto v = parse_int(field);
    if (!v) {
        // Sub-second input is rejected rather than resampled; the schema is 1 Hz.
        fail_line(path, line_no, "timestamp must be an integer number of seconds, got '" + field + "'");
    }
    return *v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::string content = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= content.size(); ++i) {
        if (i == content.size() || content[i] == '\n') {
            std::string line = content.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(std::move(line));
            start = i + 1;
        }
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace

std::vector<Recording> load_recordings(const std::filesystem::path& samples_path,
                                       const std::filesystem::path& events_path) {
    const auto sample_lines = read_lines(samples_path);
    if (sample_lines.empty() || sample_lines[0] != kSamplesHeader) {
        throw DataError(samples_path.string() + ": expected header '" + std::string(kSamplesHeader) + "'");
    }

    std::map<std::string, Recording> by_participant;
    std::set<std::pair<std::string, std::int64_t>> seen;

    for (std::size_t i = 1; i < sample_lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto fields = split_csv_line(sample_lines[i]);
        if (fields.size() != 6) {
            fail_line(samples_path, line_no,
                      "expected 6 fields, got " + std::to_string(fields.size()));
        }
        check_participant_id(samples_path, line_no, fields[0]);

        Sample s;
        s.timestamp = parse_timestamp(samples_path, line_no, fields[1]);
        s.hr = parse_optional_real(samples_path, line_no, fields[2], "hr");
        s.acc_x = parse_optional_real(samples_path, line_no, fields[3], "acc_x");
        s.acc_y = parse_optional_real(samples_path, line_no, fields[4], "acc_y");
        s.acc_z = parse_optional_real(samples_path, line_no, fields[5], "acc_z");

        const int acc_present = int(s.acc_x.has_value()) + int(s.acc_y.has_value()) + int(s.acc_z.has_value());
        if (acc_present != 0 && acc_present != 3) {
            fail_line(samples_path, line_no,
                      "acceleration components must be all present or all absent");
        }
        if (!seen.insert({fields[0], s.timestamp}).second) {
            fail_line(samples_path, line_no,
                      "duplicate timestamp " + format_int(s.timestamp) + " for participant '" + fields[0] + "'");
        }
        by_participant[fields[0]].samples.push_back(s);
    }

    const auto event_lines = read_lines(events_path);
    if (event_lines.empty() || event_lines[0] != kEventsHeader) {
        throw DataError(events_path.string() + ": expected header '" + std::string(kEventsHeader) + "'");
    }
    for (std::size_t i = 1; i < event_lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto fields = split_csv_line(event_lines[i]);
        if (fields.size() != 2) {
            fail_line(events_path, line_no,
                      "expected 2 fields, got " + std::to_string(fields.size()));
        }
        check_participant_id(events_path, line_no, fields[0]);
        const auto it = by_participant.find(fields[0]);
        if (it == by_participant.end()) {
            fail_line(events_path, line_no, "event for unknown participant '" + fields[0] + "'");
        }
        it->second.events.push_back({parse_timestamp(events_path, line_no, fields[1])});
    }

    std::vector<Recording> recordings;
    recordings.reserve(by_participant.size());
    for (auto& [id, rec] : by_participant) {
        rec.participant_id = id;
        std::sort(rec.samples.begin(), rec.samples.end(),
                  [](const Sample& a, const Sample& b) { return a.timestamp < b.timestamp; });
        std::sort(rec.events.begin(), rec.events.end(),
                  [](const EventMark& a, const EventMark& b) { return a.timestamp < b.timestamp; });
        recordings.push_back(std::move(rec));
    }
    return recordings;
}

void write_samples(const std::vector<Recording>& recordings,
                   const std::filesystem::path& samples_path) {
    std::ostringstream samples;
    samples << kSamplesHeader << '\n';
    const auto opt = [](const std::optional<double>& v) {
        return v ? format_real(*v) : std::string();
    };
    for (const auto& rec : recordings) {
        for (const auto& s : rec.samples) {
            samples << rec.participant_id << ',' << format_int(s.timestamp) << ',' << opt(s.hr)
                    << ',' << opt(s.acc_x) << ',' << opt(s.acc_y) << ',' << opt(s.acc_z) << '\n';
        }
    }
    write_file_atomic(samples_path, samples.str());
}

void write_recordings(const std::vector<Recording>& recordings,
                      const std::filesystem::path& samples_path,
                      const std::filesystem::path& events_path) {
    write_samples(recordings, samples_path);
    std::ostringstream events;
    events << kEventsHeader << '\n';
    for (const auto& rec : recordings) {
        for (const auto& e : rec.events) {
            events << rec.participant_id << ',' << format_int(e.timestamp) << '\n';
        }
    }
    write_file_atomic(events_path, events.str());
}

std::vector<Violation> validate_recording(const Recording& r) {
    std::vector<Violation> out;
    std::int64_t prev_ts = 0;
    bool first = true;
    for (const auto& s : r.samples) {
        if (!first && s.timestamp <= prev_ts) {
            out.push_back({"timestamp", s.timestamp, "sample timestamps must be strictly increasing"});
        }
        prev_ts = s.timestamp;
        first = false;
        if (s.hr && (!std::isfinite(*s.hr) || *s.hr <= 0.0)) {
            out.push_back({"hr", s.timestamp, "hr must be finite and > 0"});
        }
        const int acc_present = int(s.acc_x.has_value()) + int(s.acc_y.has_value()) + int(s.acc_z.has_value());
        if (acc_present != 0 && acc_present != 3) {
            out.push_back({"acc", s.timestamp, "acceleration components must be all present or all absent"});
        }
        for (const auto* comp : {&s.acc_x, &s.acc_y, &s.acc_z}) {
            if (comp->has_value() && !std::isfinite(comp->value())) {
                out.push_back({"acc", s.timestamp, "acceleration components must be finite"});
            }
        }
    }
    std::int64_t prev_event = 0;
    first = true;
    for (const auto& e : r.events) {
        if (!first && e.timestamp < prev_event) {
            out.push_back({"event", e.timestamp, "event timestamps must be non-decreasing"});
        }
        prev_event = e.timestamp;
        first = false;
        if (r.samples.empty() || e.timestamp < r.first_timestamp() || e.timestamp > r.last_timestamp()) {
            out.push_back({"event", e.timestamp, "event timestamp must lie within the recording's sample span"});
        }
    }
    return out;
}

}  // namespace hyperdet
