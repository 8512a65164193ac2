"""
Shared helpers: status reporting, CSV/JSON persistence, random streams and
config hashing (公共工具函数).
"""

import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pandas as pd

_QUIET = False


def set_quiet(quiet=True):
    """关闭/打开进度输出"""
    global _QUIET
    _QUIET = bool(quiet)


def report(message, force=False):
    """Print a progress line to standard error (进度信息只写 stderr)."""
    if _QUIET and not force:
        return
    print(message, file=sys.stderr, flush=True)


def make_stream(seed, *key):
    """
    Return the random stream named by ``(seed, *key)``.

    Philox is counter based, so any tuple of non-negative integers names an
    independent stream and the result never depends on which worker asks.
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def ensure_dir(path):
    """确保目录存在"""
    os.makedirs(path, exist_ok=True)
    return path


def save_table(df, csv_path, description="数据表"):
    """
    保存 DataFrame 到 CSV 文件

    Floats are written with ``repr`` precision so identical inputs give
    byte-identical files.
    """
    parent = os.path.dirname(csv_path)
    if parent:
        ensure_dir(parent)
    tmp_path = csv_path + ".partial"
    df.to_csv(tmp_path, index=False, float_format="%.17g", lineterminator="\n")
    os.replace(tmp_path, csv_path)
    report(f"📊 {description} saved: {csv_path} {df.shape}")
    return csv_path


def save_json(payload, json_path):
    parent = os.path.dirname(json_path)
    if parent:
        ensure_dir(parent)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return json_path


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def check_and_load_csv(csv_path, required_columns, data_description):
    """
    检查CSV文件是否存在，如果存在则加载，如果不存在则报错并说明数据格式要求

    Parameters
    ----------
    csv_path : str
        CSV文件路径
    required_columns : list
        必需的列名列表
    data_description : str
        数据描述和格式要求

    Returns
    -------
    pd.DataFrame
        加载的数据
    """
    if not os.path.exists(csv_path):
        report(
            f"❌ 数据文件不存在: {csv_path}\n"
            f"📋 数据格式要求:\n{data_description}\n"
            f"📝 必需的列名: {', '.join(required_columns)}",
            force=True,
        )
        raise FileNotFoundError(f"数据文件不存在: {csv_path}")

    try:
        df = pd.read_csv(csv_path)
    except pd.errors.EmptyDataError:
        raise ValueError(f"CSV文件为空: {csv_path}")

    missing_columns = [col for col in required_columns if col not in df.columns]
    if missing_columns:
        report(
            f"❌ CSV文件缺少必需的列: {', '.join(missing_columns)}\n"
            f"📋 当前文件列名: {', '.join(df.columns.tolist())}",
            force=True,
        )
        raise ValueError(f"CSV文件缺少必需的列: {missing_columns}")

    report(f"✅ 成功加载数据文件: {csv_path} {df.shape}")
    return df


def canonical_json(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_json_default)


def config_hash(payload, length=16):
    """SHA-256 of the canonical JSON form, truncated to ``length`` hex digits."""
    digest = hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()
    return digest[:length]


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def block_bounds(count, workers, per_worker=4):
    """Contiguous ``(start, stop)`` index blocks covering ``range(count)``."""
    pieces = max(1, min(count, workers * per_worker))
    edges = np.linspace(0, count, pieces + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def map_blocks(task, count, workers=1):
    """
    Run ``task(start, stop)`` over blocks of sample indices.

    Each task returns a list of records with an ``index`` attribute; the
    merged list is sorted by index, so ``workers`` never changes the result.
    """
    if workers <= 1 or count <= 1:
        results = task(0, count)
    else:
        results = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(task, a, b) for a, b in block_bounds(count, workers)]
            for fut in futures:
                results.extend(fut.result())
    return sorted(results, key=lambda rec: rec.index)
