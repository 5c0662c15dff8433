import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
from pandas import ExcelWriter

from pylevytools import logger

FLOAT_FORMAT = "%.17g"


def write_csv(df, output_file, index=False):
    Path(output_file).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(output_file, index=index, float_format=FLOAT_FORMAT)
    logger.debug("Saved csv: " + str(output_file))
    return output_file


def read_csv(input_file):
    return pd.read_csv(input_file, float_precision="round_trip")


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return value
    if isinstance(obj, pd.DataFrame):
        return _to_jsonable(obj.to_dict(orient="records"))
    return obj


def to_json(obj):
    # float repr round-trips exactly
    return json.dumps(_to_jsonable(obj), indent=2, sort_keys=True)


def write_json(obj, output_file):
    Path(output_file).parent.mkdir(parents=True, exist_ok=True)
    with open(output_file, "w", newline="\n") as f:
        f.write(to_json(obj) + "\n")
    logger.debug("Saved json: " + str(output_file))
    return output_file


def save_dataframes_to_excel(dfs, sheet_names, output_file):
    logger.info("Saving dataframes to excel: " + str(output_file))
    writer = ExcelWriter(output_file, engine='xlsxwriter')

    def get_col_widths(df):
        idx_max = max([len(str(s)) for s in df.index.values] + [len(str(df.index.name))])
        return [idx_max] + [max([len(str(s)) for s in df[col].values] + [len(str(col))]) for col in df.columns]

    for n, df in enumerate(dfs):
        if not isinstance(df, pd.DataFrame):
            continue
        df.to_excel(writer, sheet_name=sheet_names[n])
        worksheet = writer.sheets[sheet_names[n]]
        for i, width in enumerate(get_col_widths(df)):
            worksheet.set_column(i, i, min(width, 100))
        if len(df.index) > 0:
            worksheet.add_table(0, 0, len(df.index), len(df.columns),
                                {'columns': [{'header': 'Idx'}] + [{'header': str(c)} for c in list(df)]})
    writer.close()
    return output_file
