#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "windfleet/error.hpp"

namespace windfleet {

/// Grid position of a turbine. Rows are numbered west to east starting at 1,
/// columns within a row starting at 1. Printed as "RR/C", e.g. "03/2".
struct TurbineId {
    int row = 1;
    int column = 1;

    auto operator<=>(const TurbineId&) const = default;

    std::string str() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%02d/%d", row, column);
        return buf;
    }

    /// Accepts "R/C" with optional zero padding on either side.
    static std::optional<TurbineId> parse(std::string_view text) {
        const auto slash = text.find('/');
        if (slash == std::string_view::npos) return std::nullopt;
        auto to_int = [](std::string_view s) -> std::optional<int> {
            int v = 0;
            if (s.empty()) return std::nullopt;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
            return v;
        };
        auto r = to_int(text.substr(0, slash));
        auto c = to_int(text.substr(slash + 1));
        if (!r || !c || *r < 1 || *c < 1) return std::nullopt;
        return TurbineId{*r, *c};
    }
};

struct FarmLayout {
    int rows = 11;
    int columns = 5;
    double spacing_m = 600.0;
    std::set<TurbineId> missing;

    void validate() const {
        if (rows < 1 || columns < 1) throw ConfigError("farm layout needs at least one row and column");
        if (!(spacing_m > 0.0)) throw ConfigError("row spacing must be positive");
        for (const auto& id : missing)
            if (!contains(id)) throw ConfigError("missing turbine " + id.str() + " is outside the layout");
    }

    bool contains(const TurbineId& id) const {
        return id.row >= 1 && id.row <= rows && id.column >= 1 && id.column <= columns;
    }

    bool is_active(const TurbineId& id) const { return contains(id) && !missing.contains(id); }

    int active_count() const { return rows * columns - static_cast<int>(missing.size()); }

    int active_in_row(int row) const {
        int n = 0;
        for (int c = 1; c <= columns; ++c) n += is_active({row, c}) ? 1 : 0;
        return n;
    }

    /// Active turbines in row-major order.
    std::vector<TurbineId> active_turbines() const {
        std::vector<TurbineId> out;
        out.reserve(static_cast<std::size_t>(active_count()));
        for (int r = 1; r <= rows; ++r)
            for (int c = 1; c <= columns; ++c)
                if (is_active({r, c})) out.push_back({r, c});
        return out;
    }
};

/// Values laid out on the farm grid; absent cells are turbines that are
/// missing or carry no value.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int columns)
        : rows_(rows), columns_(columns), cells_(static_cast<std::size_t>(rows * columns)) {}

    int rows() const { return rows_; }
    int columns() const { return columns_; }

    std::optional<T>& at(const TurbineId& id) { return cells_[index(id)]; }
    const std::optional<T>& at(const TurbineId& id) const { return cells_[index(id)]; }

    bool operator==(const Grid&) const = default;

private:
    std::size_t index(const TurbineId& id) const {
        if (id.row < 1 || id.row > rows_ || id.column < 1 || id.column > columns_)
            throw DomainError("turbine " + id.str() + " outside grid");
        return static_cast<std::size_t>((id.row - 1) * columns_ + (id.column - 1));
    }

    int rows_ = 0;
    int columns_ = 0;
    std::vector<std::optional<T>> cells_;
};

}  // namespace windfleet
