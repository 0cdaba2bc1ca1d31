#pragma once

// Byte-stable CSV and JSON output. Reals use the shortest decimal that parses
// back to the same double; non-finite values print as nan, inf, -inf.

#include <filesystem>
#include <string>
#include <vector>

#include "levyclock/harness.hpp"

namespace levyclock {

std::string format_real(double x);

/// Minimal CSV quoting for free-text cells.
std::string csv_escape(const std::string& cell);

std::string samples_csv(const MCResult& result);
std::string summary_csv(const MCResult& result);
std::string tests_csv(const MCResult& result);
std::string prediction_csv(const MCResult& result);
std::string moments_csv(const MCResult& result);
std::string sweep_csv(const MCResult& result);
std::string normality_csv(const MCResult& result);
std::string histogram_csv(const MCResult& result);
std::string kde_csv(const MCResult& result);
std::string stationary_csv(const MCResult& result);
std::string stationary_density_csv(const MCResult& result);
std::string manifest_json(const MCResult& result, const std::vector<std::string>& files);

/// Writes every non-empty table plus manifest.json into directory (created if
/// needed) and returns the file names written.
std::vector<std::string> write_result(const MCResult& result, const std::filesystem::path& directory);

/// Closed-form table over t: clock mean u(t), clock variance lambda^2 w(t),
/// exact process mean and variance, and the asymptotic m t and v t.
std::string closed_form_csv(const ProcessSpec& spec, const std::vector<double>& times);

/// Stationary moments of orders 1, 2 alpha, 2 for a CKLS clock.
std::string stationary_moments_csv(const CKLSParams& params);
/// Stationary density on a log-spaced grid around eta.
std::string stationary_density_table_csv(const CKLSParams& params);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace levyclock
