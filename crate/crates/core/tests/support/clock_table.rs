//! Civil-time readings of every hour with an explicit meridiem, written out
//! by hand rather than computed.

#![allow(dead_code)]

pub const MERIDIEM_HOURS: [(&str, &str); 24] = [
    ("12~am", "00:00"),
    ("1~am", "01:00"),
    ("2~am", "02:00"),
    ("3~am", "03:00"),
    ("4~am", "04:00"),
    ("5~am", "05:00"),
    ("6~am", "06:00"),
    ("7~am", "07:00"),
    ("8~am", "08:00"),
    ("9~am", "09:00"),
    ("10~am", "10:00"),
    ("11~am", "11:00"),
    ("12~pm", "12:00"),
    ("1~pm", "13:00"),
    ("2~pm", "14:00"),
    ("3~pm", "15:00"),
    ("4~pm", "16:00"),
    ("5~pm", "17:00"),
    ("6~pm", "18:00"),
    ("7~pm", "19:00"),
    ("8~pm", "20:00"),
    ("9~pm", "21:00"),
    ("10~pm", "22:00"),
    ("11~pm", "23:00"),
];
