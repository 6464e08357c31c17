#include "hyperdet/windowing.hpp"

#include <cmath>
#include <sstream>

#include "hyperdet/error.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

void WindowParams::validate() const {
    if (step_s < 1) throw ConfigError("WindowParams: step_s must be >= 1");
    if (!(max_missing_fraction >= 0.0 && max_missing_fraction <= 1.0)) {
        throw ConfigError("WindowParams: max_missing_fraction must be in [0,1]");
    }
}

namespace {

using OptSeries = std::vector<std::optional<double>>;

// Spreads samples onto the dense 1 Hz grid between the first and last
// timestamps; seconds without a sample row become missing cells.
OptSeries to_grid(const Recording& r, std::optional<double> Sample::*channel) {
    const std::int64_t first = r.first_timestamp();
    OptSeries grid(static_cast<std::size_t>(r.span_seconds()));
    for (const auto& s : r.samples) {
        grid[static_cast<std::size_t>(s.timestamp - first)] = s.*channel;
    }
    return grid;
}

}  // namespace

Recording impute_recording(const Recording& r, const ImputationConfig& cfg) {
    cfg.validate();
    Recording out;
    out.participant_id = r.participant_id;
    out.events = r.events;
    if (r.samples.empty()) return out;

    const OptSeries hr = impute_series(to_grid(r, &Sample::hr), cfg);
    const OptSeries ax = impute_series(to_grid(r, &Sample::acc_x), cfg);
    const OptSeries ay = impute_series(to_grid(r, &Sample::acc_y), cfg);
    const OptSeries az = impute_series(to_grid(r, &Sample::acc_z), cfg);

    const std::int64_t first = r.first_timestamp();
    out.samples.resize(hr.size());
    for (std::size_t g = 0; g < hr.size(); ++g) {
        Sample& s = out.samples[g];
        s.timestamp = first + static_cast<std::int64_t>(g);
        s.hr = hr[g];
        s.acc_x = ax[g];
        s.acc_y = ay[g];
        s.acc_z = az[g];
    }
    return out;
}

std::vector<Window> make_windows(const Recording& r, const ImputationConfig& cfg,
                                 const WindowParams& wp) {
    cfg.validate();
    wp.validate();
    std::vector<Window> out;
    const std::int64_t span = r.span_seconds();
    if (span < Window::kDurationS) return out;

    const OptSeries hr = impute_series(to_grid(r, &Sample::hr), cfg);
    const OptSeries ax = impute_series(to_grid(r, &Sample::acc_x), cfg);
    const OptSeries ay = impute_series(to_grid(r, &Sample::acc_y), cfg);
    const OptSeries az = impute_series(to_grid(r, &Sample::acc_z), cfg);

    const std::int64_t first = r.first_timestamp();
    std::size_t event_cursor = 0;
    for (std::int64_t start = first; start + Window::kDurationS <= r.last_timestamp() + 1;
         start += wp.step_s) {
        Window w;
        w.participant_id = r.participant_id;
        w.start = start;
        w.hr.resize(Window::kDurationS);
        w.acc_mag.resize(Window::kDurationS);

        int missing_cells = 0;
        for (int i = 0; i < Window::kDurationS; ++i) {
            const std::size_t g = static_cast<std::size_t>(start - first + i);
            w.hr[i] = hr[g];
            if (!w.hr[i]) ++missing_cells;
            if (ax[g] && ay[g] && az[g]) {
                w.acc_mag[i] = std::sqrt(*ax[g] * *ax[g] + *ay[g] * *ay[g] + *az[g] * *az[g]);
            } else {
                ++missing_cells;
            }
        }
        w.missing_fraction = missing_cells / (2.0 * Window::kDurationS);

        // Events are sorted; advance a cursor past marks before this window,
        // then check containment in the half-open interval [start, start+60).
        while (event_cursor < r.events.size() && r.events[event_cursor].timestamp < start) {
            ++event_cursor;
        }
        for (std::size_t e = event_cursor; e < r.events.size(); ++e) {
            if (r.events[e].timestamp >= start + Window::kDurationS) break;
            w.label = 1;
            break;
        }

        if (w.missing_fraction <= wp.max_missing_fraction) out.push_back(std::move(w));
    }
    return out;
}

void write_windows(const std::vector<Window>& windows, const std::filesystem::path& path) {
    std::ostringstream ss;
    ss << "participant_id,window_start,label,missing_fraction\n";
    for (const auto& w : windows) {
        ss << w.participant_id << ',' << format_int(w.start) << ',' << w.label << ','
           << format_real(w.missing_fraction) << '\n';
    }
    write_file_atomic(path, ss.str());
}

}  // namespace hyperdet
