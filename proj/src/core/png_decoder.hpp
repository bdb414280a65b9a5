// Copyright 2026 The sgmreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string_view>

#include "core/imaging.hpp"

namespace reid::imaging {

/// Decodes an 8-bit PNG into RGB. Alpha is dropped, gray is replicated.
/// 16-bit images are rejected so that no gamma handling is ever applied.
RasterImage decode_png(std::string_view bytes);

}  // namespace reid::imaging
