"""First two verses of Matthew (English/Igbo), their word alignments, and
English tagger output — the worked sample the projection stage must reproduce.
"""

EN_VERSE_1 = "1 The book of the history of Jesus Christ , son of David , son of Abraham :"
IG_VERSE_1 = "1 Akwukwo nke koru akuko banyere Jizos Kraist , nwa Devid , nwa Ebreham :"
ALIGN_1 = "1 0-0 1-2 2-3 3-5 4-5 5-5 5-6 6-7 7-8 8-9 9-10 10-12 11-13 12-14 13-16 14-17"
EN_TAGS_1 = ["CD", "DT", "NN", "IN", "DT", "NN", "IN", "NNP", "NNP", ",",
             "NN", "IN", "NNP", ",", "NN", "IN", "NNP", ":"]

EN_VERSE_2 = ("2 Abraham became father to Isaac ; Isaac became father to Jacob ; "
              "Jacob became father to Judah and his brothers ;")
IG_VERSE_2 = "2 Ebreham muru Aizik ; Aizik amuo Jekob ; Jekob amuo Juda na umunne ya ndi ikom ;"
ALIGN_2 = ("2 0-0 1-1 2-2 6-3 3-5 4-6 5-7 6-8 6-9 7-11 8-12 9-13 10-14 10-15 "
           "11-17 12-18 14-19 13-20 16-20 17-21")
EN_TAGS_2 = ["CD", "NNP", "VBD", "NN", "TO", "NNP", ":", "NNP", "VBD", "NN", "TO",
             "NNP", ":", "NNP", "VBD", "NN", "TO", "NNP", "CC", "PRP$", "NNS", ":"]


def parallel_files():
    source = f"Matiu:1:1\t{EN_VERSE_1}\nMatiu:1:2\t{EN_VERSE_2}\n"
    target = f"Matiu:1:1\t{IG_VERSE_1}\nMatiu:1:2\t{IG_VERSE_2}\n"
    return source, target


def alignment_file():
    return f"{ALIGN_1}\n{ALIGN_2}\n"
