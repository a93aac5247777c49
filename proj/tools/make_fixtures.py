# Copyright 2026 The qgen Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the fixture catalog, templates and corpus templates under
data/fixtures. The query log is written by `qgen synth-corpus`."""

import json, os, random
import snowballstemmer
OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "fixtures")
st = snowballstemmer.stemmer('porter')
rng = random.Random(20261015)
onsets = ["b","d","f","g","k","l","m","n","p","r","s","t","v","z","br","dr","kr","tr","zel","mor","vel","quin","jor","tal","sen","kav","lum","nix","rav","oss"]
vowels = ["a","e","i","o","u","a","e","o","ai","y"]
codas = ["","n","r","x","s","th","l","nd","z","k"]
def word():
    s = rng.choice(onsets)
    for _ in range(rng.choice([1,2,2])):
        s += rng.choice(vowels) + rng.choice(["l","r","n","m","v","z","k","t",""])
    s += rng.choice(codas)
    return s
genres = ["techno","ambient","folk","jazz","punk","soul","grime","electro","synth","blues","reggae","indie","metal","disco","trance","funk"]
cities = ["berlin","lagos","dublin","stockholm","montreal","glasgow","bogota","melbourne","detroit","helsinki","nairobi","seoul"]
nouns = ["band","duo","trio","producer","singer","songwriter","collective","ensemble","project","quartet"]
adjs = ["german","nigerian","irish","swedish","canadian","scottish","colombian","australian","american","finnish","kenyan","korean"]
extra = ["guitar","piano","drums","vocals","strings","records","label","festival","album","single","tour","remix","debut","studio","chart","award","radio","club","night","summer","winter","river","dream","light","shadow","heart","ocean","golden","silver","midnight"]
used, names, vocab_stems = set(), [], set()
for w in genres+cities+nouns+adjs+extra: vocab_stems.add(st.stemWord(w))
common = {"play","music","song","songs","by","the","hits","queue","turn","on","album","latest","new","best","radio","station","shuffle","listen","to","top","tracks","from","live","greatest","some","artist","put","start","playlist","discography","popular","mix","me","i","want","hear","let","s","more","of","tell","about","who","is","something","like","era","and","a","dance","track","last","single"}
for w in common: vocab_stems.add(st.stemWord(w))
def fresh():
    while True:
        w = word()
        if len(w) < 4: continue
        s = st.stemWord(w)
        if s in used or s in vocab_stems or st.stemWord(s) != s: continue
        used.add(s); return w
for i in range(50):
    n = rng.choice([1,1,1,2,2,3])
    names.append(" ".join(fresh().capitalize() for _ in range(n)))
ents = []
for i, name in enumerate(names):
    g1, g2 = rng.sample(genres, 2)
    ci = rng.randrange(len(cities))
    noun = rng.choice(nouns)
    yr = rng.randint(1972, 2019)
    e = rng.sample(extra, 6)
    desc = (f"{name} is a {adjs[ci].capitalize()} {g1} {noun} formed in {cities[ci].capitalize()} in {yr}. "
            f"Known for {g2} {e[0]} and {e[1]} {e[2]}, the {noun} recorded the {e[3]} album {e[4].capitalize()} {e[5].capitalize()}.")
    doc = desc + f" Their {e[0]} {e[1]} sound draws on {g1} and {g2} from the {cities[ci].capitalize()} {e[2]} scene."
    ents.append({"id": f"artist-{i+1:03d}", "name": name, "description": desc, "document": doc})
with open(os.path.join(OUT, "catalog.jsonl"),"w") as f:
    for e in ents: f.write(json.dumps(e, ensure_ascii=False)+"\n")
templates = ["play $ARTIST","play music by $ARTIST","play the song $ARTIST","play $ARTIST music","play songs by $ARTIST",
 "play the latest $ARTIST","play $ARTIST songs","shuffle $ARTIST","play the new $ARTIST","play the best of $ARTIST",
 "play $ARTIST radio","listen to $ARTIST","play top tracks by $ARTIST","play the album by $ARTIST","play $ARTIST hits",
 "put on $ARTIST","start $ARTIST radio","play the greatest hits of $ARTIST","play $ARTIST live","play some $ARTIST",
 "queue $ARTIST","play the playlist $ARTIST","play popular songs by $ARTIST","play a mix of $ARTIST","play the $ARTIST station",
 "i want to hear $ARTIST","let me hear $ARTIST","play more $ARTIST","play $ARTIST tracks","turn on $ARTIST",
 "play the single by $ARTIST","play $ARTIST discography","play songs from $ARTIST","play the last album by $ARTIST","play $ARTIST dance tracks",
 "play the top songs of $ARTIST","play new music from $ARTIST","play $ARTIST playlist","play the popular $ARTIST","start a $ARTIST mix",
 "play $ARTIST music radio","play the tracks by $ARTIST"]
w = 1000.0
lines = []
for t in templates:
    lines.append(f"{w:g}\t{t}"); w = round(w*0.86, 1)
open(os.path.join(OUT, "templates.tsv"),"w").write("\n".join(lines)+"\n")
open(os.path.join(OUT, "corpus_templates.tsv"),"w").write("2000\t$ARTIST\n"+"\n".join(lines)+"\n")
