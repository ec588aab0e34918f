"""How the word-level wait-k schedule interleaves reads and writes.

The i-th target word waits for min(i + k - 1, |x|) source words.  This
script prints the READ/WRITE trace and the resulting delays for a few k,
then the average lagging they imply.
"""
from simulmt.metrics import DelayRecord, average_lagging, laal
from simulmt.scheduler import drive_schedule

SRC_LEN, TGT_LEN = 8, 7

for k in (1, 3, 5, 9):
    actions, delays = drive_schedule(SRC_LEN, TGT_LEN, k)
    trace = "".join("R" if a.value == "read" else "W" for a in actions)
    rec = DelayRecord(tuple(delays), SRC_LEN, TGT_LEN, TGT_LEN)
    print(f"k={k}  {trace:<16} delays={delays}  AL={average_lagging(rec):.2f}  "
          f"LAAL={laal(rec):.2f}")

# under-generation: LAAL divides by the reference length, so short outputs look no better
short = DelayRecord((3, 4), 4, 2, 4)
print(f"\nshort hypothesis: AL={average_lagging(short)}  LAAL={laal(short)}")
