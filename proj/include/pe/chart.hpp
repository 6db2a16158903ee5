#pragma once

#include <filesystem>

#include "pe/eval.hpp"

namespace pe {

/// Grid of per-model top-k bar charts. Ensemble members get a yellow panel,
/// the target label's bar is green.
RasterImage transfer_chart(const TransferReport& report);

void write_transfer_chart(const std::filesystem::path& path, const TransferReport& report);

}  // namespace pe
