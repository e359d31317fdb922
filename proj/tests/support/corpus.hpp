#pragma once

#include <string>
#include <vector>

namespace testing_util {

/// Twenty short items with deliberate phrase overlap, used by the metric tests.
inline const std::vector<std::string> &twenty_items() {
    static const std::vector<std::string> items{
        "The cat sat on the mat near the door.",
        "The cat sat on the warm mat.",
        "A dog slept under the kitchen table all afternoon.",
        "Which planet is closest to the sun?",
        "Which planet has the most moons in the solar system?",
        "How many legs does a spider have?",
        "How many legs does an insect have?",
        "The train leaves the station at noon every day.",
        "The bus leaves the station at noon on Sundays.",
        "Water boils at one hundred degrees at sea level.",
        "Ice melts when the temperature rises above zero degrees.",
        "Who wrote the novel about a white whale?",
        "Who painted the ceiling of the chapel in Rome?",
        "A rolling stone gathers no moss.",
        "Blood is thicker than water, or so the saying goes.",
        "She bought three apples and two pears at the market.",
        "He bought two apples and three pears at the market.",
        "Light travels faster than sound.",
        "Sound travels faster in water than in air.",
        "Go",
    };
    return items;
}

} // namespace testing_util
