"""Regenerate fixture_dump.xml, the 12-editor dump behind the golden results.

Each editor's revision schedule is engineered to land specific linguistic
terms (clear of range boundaries): award-worthy veterans, a burst vandal, a
bot-patterned IP, an IP whose profile knocks out every forecast argument
under grounded semantics on the pairwise knowledge base, an editor with a
negative byte balance, and assorted middles.

Run from the repository root:  python tests/data/gen_fixture.py
"""
from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path
from xml.sax.saxutils import escape

DUMP_DATE = datetime(2021, 1, 15, tzinfo=timezone.utc)


def at(y, m, d, h=0, mi=0):
    return datetime(y, m, d, h, mi, tzinfo=timezone.utc)


def days(n):
    return timedelta(days=n)


class Dump:
    def __init__(self):
        self.pages = {}  # title -> list of (ts, editor, anonymous, bytes, minor, comment)
        self._order = []

    def edit(self, title, ts, editor, size, minor=False, comment=None, anonymous=False):
        if title not in self.pages:
            self.pages[title] = []
            self._order.append(title)
        self.pages[title].append((ts, editor, anonymous, size, minor, comment))

    def to_xml(self) -> str:
        out = ['<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/" '
               'xml:lang="xx" version="0.10">',
               "  <siteinfo><sitename>FixtureWiki</sitename></siteinfo>"]
        rev_id = 1000
        for page_id, title in enumerate(self._order, start=1):
            out.append("  <page>")
            out.append(f"    <title>{escape(title)}</title>")
            out.append("    <ns>0</ns>")
            out.append(f"    <id>{page_id}</id>")
            for ts, editor, anonymous, size, minor, comment in sorted(self.pages[title]):
                rev_id += 1
                out.append("    <revision>")
                out.append(f"      <id>{rev_id}</id>")
                out.append(f"      <timestamp>{ts.strftime('%Y-%m-%dT%H:%M:%SZ')}</timestamp>")
                if anonymous:
                    out.append(f"      <contributor><ip>{escape(editor)}</ip></contributor>")
                else:
                    out.append(f"      <contributor><username>{escape(editor)}</username>"
                               f"<id>{abs(hash(editor)) % 1000}</id></contributor>")
                if minor:
                    out.append("      <minor />")
                if comment:
                    out.append(f"      <comment>{escape(comment)}</comment>")
                out.append('      <model>wikitext</model>')
                out.append('      <format>text/x-wiki</format>')
                out.append(f'      <text bytes="{size}" />')
                out.append("    </revision>")
            out.append("  </page>")
        out.append("</mediawiki>")
        return "\n".join(out) + "\n"


def build() -> Dump:
    dump = Dump()

    # alice: veteran all-rounder (pages/activity/bytes high, comments high,
    # presence high, monthly cadence -> frequency and regularity high)
    start = at(2004, 3, 1)
    for i in range(25):
        ts = start + days(31 * i)
        title = f"Alice/{i}" if i < 22 else f"Alice/{i - 22}"
        size = 140 if i < 22 else 240
        dump.edit(title, ts, "alice", size,
                  minor=(i % 2 == 1), comment=None if i % 5 == 4 else "tidy")

    # bob: solid medium editor, every 58 days
    start = at(2008, 5, 1)
    for i in range(15):
        ts = start + days(58 * i)
        title = f"Bob/{i}" if i < 12 else f"Bob/{i - 12}"
        size = 80 if i < 12 else 120
        dump.edit(title, ts, "bob", size,
                  minor=(i % 5 >= 3), comment="note" if i % 5 < 3 else None)

    # carol: ancient, sparse, high-value edits (activity low but presence high;
    # flagged-for-review ratio keeps the protecting rule active)
    for i, offset in enumerate((0, 380, 762)):
        dump.edit(f"Carol/{i}", at(2003, 5, 10) + days(offset), "carol",
                  (900, 900, 800)[i], minor=(i == 2), comment="source added")

    # dave: ancient and sparse with nothing flagged, so age alone argues for him
    dump.edit("Dave/0", at(2004, 6, 1), "dave", 50, minor=True)
    dump.edit("Dave/0", at(2004, 6, 1) + days(500), "dave", 70, minor=True)
    dump.edit("Dave/1", at(2004, 6, 1) + days(1000), "dave", 10, minor=True)

    # eve: burst of edits then one stray later (low regularity/presence, vandal
    # premise pattern: low presence+regularity+comments+pages)
    start = at(2020, 4, 1)
    for i in range(11):
        ts = start + days(2 * i)
        dump.edit(f"Eve/{i % 3}", ts, "eve", 60 * (i // 3 + 1) + 20 * (i % 3),
                  minor=(i != 4), comment="fix" if i == 7 else None)
    dump.edit("Eve/0", start + days(263), "eve", 200, minor=True)
    dump.edit("Eve/1", start + days(262), "eve", 200, minor=True)
    dump.edit("Eve/2", start + days(261), "eve", 200, minor=True)

    # 192.168.7.7: bot pattern (anonymous, no comments, nothing flagged, many
    # pages, large byte volume, short burst)
    start = at(2019, 3, 1)
    for i in range(30):
        ts = start + days(50 * i / 29)
        title = f"Botfarm/{i}" if i < 25 else f"Botfarm/{i - 25}"
        size = 200 if i < 25 else 200
        dump.edit(title, ts, "192.168.7.7", size, minor=True, anonymous=True)

    # 10.1.2.3: anonymous middle profile; every feature lands in a term that
    # conflicts with anonymity on the pairwise knowledge base
    start = at(2014, 3, 15)
    for i in range(12):
        ts = start + days(70 * i)
        dump.edit(f"Anon7/{i}", ts, "10.1.2.3", 5,
                  minor=(i % 6 != 0), comment="cleanup" if i % 3 == 0 else None,
                  anonymous=True)

    # grace: balanced medium editor
    start = at(2009, 2, 1)
    for i in range(14):
        ts = start + days(55 * i)
        title = f"Grace/{i}" if i < 11 else f"Grace/{i - 11}"
        size = 80 if i < 11 else 110
        dump.edit(title, ts, "grace", size,
                  minor=(i % 2 == 1), comment="expand" if i % 7 < 4 else None)

    # 203.0.113.9: careful anonymous editor (few, well-commented, flagged edits)
    for i, offset in enumerate((0, 150, 300, 450, 600)):
        dump.edit(f"Heidi/{min(i, 1)}", at(2015, 6, 1) + days(offset), "203.0.113.9",
                  (150, 250, 50, 80, 100)[i], minor=(i == 4),
                  comment=None if i == 4 else "rewrite", anonymous=True)

    # ivan: very active on very few pages, paired edits every ~90 days
    start = at(2010, 9, 1)
    for i in range(22):
        cluster, pos = divmod(i, 2)
        ts = start + days(90 * cluster + pos)
        dump.edit(f"Ivan/{i % 4}", ts, "ivan", 150 + 100 * (i // 4),
                  minor=(i % 22 >= 7), comment="rework" if i % 3 == 0 else None)

    # judy: prolific veteran
    start = at(2005, 1, 20)
    for i in range(28):
        ts = start + days(26 * i)
        title = f"Judy/{i}" if i < 21 else f"Judy/{i - 21}"
        size = 140 if i < 21 else 180
        dump.edit(title, ts, "judy", size,
                  minor=(i % 2 == 1), comment=None if i % 14 >= 11 else "ref")

    # 198.51.100.4: anonymous remover; net byte balance is negative
    kevin_schedule = [
        ("Alice/0", at(2019, 9, 5), 140),
        ("Alice/0", at(2019, 9, 5) + days(85), 60),
        ("Alice/0", at(2019, 9, 5) + days(170), 20),
        ("Alice/1", at(2019, 9, 5) + days(255), 100),
        ("Alice/1", at(2019, 9, 5) + days(340), 10),
    ]
    for title, ts, size in kevin_schedule:
        dump.edit(title, ts, "198.51.100.4", size, minor=True, anonymous=True)

    return dump


def main():
    here = Path(__file__).parent
    (here / "fixture_dump.xml").write_text(build().to_xml(), encoding="utf-8")
    (here / "barnstars.txt").write_text("alice\nbob\njudy\n", encoding="utf-8")
    print("wrote", here / "fixture_dump.xml")


if __name__ == "__main__":
    main()
