# -*- coding: utf-8 -*-
import os
from datetime import datetime

import numpy as np
import pandas as pd
from joblib import Parallel, delayed


def saveTable(table, filename, config_hash, seed, float_format='%.12g'):
    """ Writes a table as CSV followed by one metadata comment line.

    Parameters:
        table: pandas DataFrame or a dict of equal-length columns.
        config_hash: digest of the effective configuration.
        seed: master seed of the run.
    """
    if not isinstance(table, pd.DataFrame):
        table = pd.DataFrame(table)
    table.to_csv(filename, index=False, float_format=float_format)
    with open(filename, 'a') as out:
        out.write('# config_hash=%s seed=%d\n' % (config_hash, int(seed)))
    return filename


def readTable(filename):
    return pd.read_csv(filename, comment='#')


def spawnSeeds(seed, n):
    """ n independent child seeds of the master seed; shard k always gets child k. """
    return np.random.SeedSequence(int(seed)).spawn(int(n))


def shardSizes(total, shards):
    shards = max(1, min(int(shards), int(total))) if total > 0 else 1
    base, extra = divmod(int(total), shards)
    return [base + (1 if k < extra else 0) for k in range(shards)]


def runShards(function, total, seed, shards, workers, *args, **kwargs):
    """ Splits `total` draws into shards and runs function(size, seed_seq, *args)
    on each, returning the shard results in shard order.
    """
    sizes = shardSizes(total, shards)
    seeds = spawnSeeds(seed, len(sizes))
    if workers is None or workers <= 1 or len(sizes) == 1:
        return [function(size, s, *args, **kwargs) for size, s in zip(sizes, seeds)]
    return Parallel(n_jobs=workers)(delayed(function)(size, s, *args, **kwargs)
                                    for size, s in zip(sizes, seeds))


def makeRunDir(out_dir, command, exact=False):
    if exact:
        path = out_dir
    else:
        stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        path = os.path.join(out_dir, '%s_%s' % (command, stamp))
    if not os.path.exists(path):
        os.makedirs(path)
    return path


def logGrid(lo, hi, points=40):
    """ Distinct integers spread geometrically over [lo, hi]. """
    grid = np.unique(np.round(np.geomspace(lo, hi, points)).astype(np.int64))
    return grid[(grid >= lo) & (grid <= hi)]


def formatSlope(name, value, ci):
    return '%s=%.4f[%.4f,%.4f]' % (name, value, ci[0], ci[1])


def writeSummary(filename, entries, criteria):
    """ summary.txt: key=value lines, then one PASS/FAIL/INCONCLUSIVE line per criterion. """
    with open(filename, 'w') as out:
        for key, value in entries:
            out.write('%s=%s\n' % (key, value))
        for c in criteria:
            out.write('%s %s %s\n' % (c.status, c.name, c.detail))
