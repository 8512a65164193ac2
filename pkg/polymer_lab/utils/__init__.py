from .common_utils import (
    canonical_json,
    check_and_load_csv,
    config_hash,
    ensure_dir,
    file_sha256,
    make_stream,
    map_blocks,
    block_bounds,
    report,
    save_json,
    save_table,
    set_quiet,
)
from .errors import *  # noqa: F401,F403
