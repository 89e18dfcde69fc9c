#pragma once

#include "mfglab/population.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace mfglab {

/// Shortest round-trip-safe text: 17 significant digits.
std::string format_double(double v);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(const std::string& s);
    CsvWriter& operator<<(const char* s) { return *this << std::string(s); }
    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(int v);
    CsvWriter& operator<<(long v);
    /// Ends the current row; throws if the field count differs from the header.
    void end_row();
    void close();

private:
    void field(const std::string& text);

    std::string path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// Simple reader for the files this library writes (no embedded newlines).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

/// zstar.csv (t, z_1..z_n), mean_control.csv (t, u_1..u_m) and policy.csv
/// (k, t, block, row, col, value) with blocks shift, scale, coef_p, coef_q.
void save_equilibrium(const std::string& dir, const Model& model, const Equilibrium& eq);
Equilibrium load_equilibrium(const std::string& dir, const Model& model);

void write_rates_csv(const std::string& path, const RateTable& t);
void write_nash_csv(const std::string& path, const RateTable& t);
void write_fits_csv(const std::string& path, const RateTable& t);

} // namespace mfglab
