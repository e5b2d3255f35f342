# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
from .cli import main

raise SystemExit(main())
